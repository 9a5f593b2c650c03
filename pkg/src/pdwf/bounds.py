"""Closed-form evaluation of the explicit approximation constants.

Two test-function classes are supported. ``SmoothStatisticClass`` covers
statistics h(<phi_1, mu>, ..., <phi_k, mu>) with h twice differentiable and
a Lipschitz second derivative; ``ProductMomentClass`` covers k-fold moment
functionals <phi, mu^k>. For each class the per-order constants feed the
Stein factors D_1..D_3, which multiply the chain's drift, diffusion, and
higher-order discrepancy terms A_1..A_3; the final distance bound is
(D_1 A_1 + D_2 A_2 + D_3 A_3) / 2.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .errors import DomainError, ValidationError


@dataclass(frozen=True)
class SmoothStatisticClass:
    """h(<phi_1,mu>,...,<phi_k,mu>): sup norms of h's derivatives and sum of phi norms."""

    grad_sup: float        # sup over coordinates of |d_i h|
    hess_sup: float        # sup over pairs of |d_ij h|
    hess_lip: float        # Lipschitz constant of the second derivative
    phi_norm_sum: float    # sum of the sup norms of the phi_i

    def __post_init__(self):
        if min(self.grad_sup, self.hess_sup, self.hess_lip, self.phi_norm_sum) < 0:
            raise ValidationError("norms must be >= 0")


@dataclass(frozen=True)
class ProductMomentClass:
    """<phi, mu^k>: the order k and the sup norm of phi."""

    k: int
    phi_sup: float = 1.0

    def __post_init__(self):
        if self.k < 1:
            raise ValidationError("k must be >= 1")
        if self.phi_sup < 0:
            raise ValidationError("phi_sup must be >= 0")


TestFunctionClass = SmoothStatisticClass | ProductMomentClass


def order_constants(tf: TestFunctionClass) -> tuple[float, float, float]:
    """Per-order constants (first, second, third) of a test-function class."""
    if isinstance(tf, SmoothStatisticClass):
        s = tf.phi_norm_sum
        return (tf.grad_sup * s, tf.hess_sup * s * s, tf.hess_lip * s**3)
    k, c = tf.k, tf.phi_sup
    return (k * c, k * (k - 1) * c, k * (k - 1) * (k - 2) * c)


def stein_constants(tf: TestFunctionClass, theta: float) -> tuple[float, float, float]:
    """Factors multiplying the drift, diffusion, and higher-order terms."""
    if theta <= 0:
        raise DomainError("theta must be > 0")
    l1, l2, l3 = order_constants(tf)
    d1 = 4.0 * l1 / theta
    d2 = d1 + 4.0 * l2 / (theta + 1.0)
    second_coeff = 16.0 if isinstance(tf, SmoothStatisticClass) else 12.0
    d3 = d1 + second_coeff * l2 / (theta + 1.0) + 16.0 * l3 / (3.0 * (theta + 2.0))
    return (d1, d2, d3)


def partition_stein_constants(n: int, theta: float) -> tuple[float, float, float]:
    """Factors for the total variation bound on sampled partitions of size n.

    Coincide with ``stein_constants`` for the product-moment class of order n
    with unit sup norm.
    """
    if n < 1:
        raise ValidationError("n must be >= 1")
    if theta <= 0:
        raise DomainError("theta must be > 0")
    d1 = 4.0 * n / theta
    d2 = d1 + 4.0 * n * (n - 1) / (theta + 1.0)
    d3 = d1 + 12.0 * n * (n - 1) / (theta + 1.0) + 16.0 * n * (n - 1) * (n - 2) / (3.0 * (theta + 2.0))
    return (d1, d2, d3)


@dataclass(frozen=True)
class WFBoundInputs:
    """Inputs for the Wright-Fisher bound: size, target theta, mutation suprema,
    and the 3/2 moment of the stationary type count."""

    N: int
    theta: float
    p_sup: float
    p_dev_sup: float
    kernel_dev_sup: float
    k32: float
    k32_mode: str = "value"  # 'value', 'mc', or 'bound'

    def __post_init__(self):
        if self.N < 1:
            raise ValidationError("N must be >= 1")
        if self.theta <= 0:
            raise DomainError("theta must be > 0")
        if not 0 <= self.p_sup <= 1:
            raise ValidationError("p_sup must be in [0, 1]")
        if self.p_dev_sup < 0 or self.kernel_dev_sup < 0:
            raise ValidationError("deviation suprema must be >= 0")
        if self.k32 < 1:
            raise ValidationError("k32 must be >= 1 (at least one type)")

    @property
    def is_pim(self) -> bool:
        return self.p_dev_sup == 0.0 and self.kernel_dev_sup == 0.0


def pim_inputs(N: int, theta: float, k32: float, k32_mode: str = "value") -> WFBoundInputs:
    """Inputs for parent-independent mutation at rate theta/(2N)."""
    return WFBoundInputs(N, theta, p_sup=theta / (2.0 * N), p_dev_sup=0.0,
                         kernel_dev_sup=0.0, k32=k32, k32_mode=k32_mode)


def wf_error_terms(inp: WFBoundInputs,
                   third_moment_coeff: float = 14.0) -> tuple[float, float, float]:
    """Drift, diffusion, and higher-order discrepancies (A_1, A_2, A_3) of one
    Wright-Fisher generation against the limiting dynamics.

    ``third_moment_coeff`` is the inner constant of the higher-order term;
    the conservative default is 14, and 12 selects the sharper variant of
    the same chain of inequalities.
    """
    n, th = inp.N, inp.theta
    a1 = 4.0 * n * inp.p_dev_sup + th * inp.kernel_dev_sup
    a2 = 4.0 * inp.p_sup * (n * inp.p_sup + 3.0)
    np_ = n * inp.p_sup
    inner = math.sqrt(2.0) + 2.0 * (third_moment_coeff * (np_**3 + np_)) ** (1.0 / 3.0)
    a3 = inp.k32 / (3.0 * math.sqrt(n)) * inner**3
    return (a1, a2, a3)


@dataclass(frozen=True)
class BoundReport:
    """Everything that went into one evaluated bound."""

    theta: float
    order_consts: tuple[float, float, float]
    stein_consts: tuple[float, float, float]
    error_terms: tuple[float, float, float]
    bound: float
    provenance: dict = field(default_factory=dict)

    @property
    def vacuous(self) -> bool:
        return self.bound > 1.0

    def to_dict(self) -> dict:
        return {
            "theta": self.theta,
            "order_constants": list(self.order_consts),
            "stein_constants": list(self.stein_consts),
            "error_terms": list(self.error_terms),
            "bound": self.bound,
            "vacuous": self.vacuous,
            "provenance": self.provenance,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def wf_dp_bound(tf: TestFunctionClass, inp: WFBoundInputs,
                third_moment_coeff: float = 14.0) -> BoundReport:
    """Distance bound between the stationary type measure and its limit law."""
    d = stein_constants(tf, inp.theta)
    a = wf_error_terms(inp, third_moment_coeff=third_moment_coeff)
    bound = 0.5 * (d[0] * a[0] + d[1] * a[1] + d[2] * a[2])
    prov = {
        "N": inp.N,
        "p_sup": inp.p_sup,
        "p_dev_sup": inp.p_dev_sup,
        "kernel_dev_sup": inp.kernel_dev_sup,
        "k32": inp.k32,
        "k32_mode": inp.k32_mode,
        "third_moment_coeff": third_moment_coeff,
        "test_class": type(tf).__name__,
    }
    return BoundReport(inp.theta, order_constants(tf), d, a, bound, prov)


def wf_sampling_tv_bound(n: int, inp: WFBoundInputs,
                         third_moment_coeff: float = 14.0) -> float:
    """Total variation bound between the sampled n-partition law and the exact
    sampling formula, for parent-independent mutation at rate theta/(2N)."""
    if n < 1:
        raise ValidationError("n must be >= 1")
    if not inp.is_pim:
        raise ValidationError("sampling TV bound requires parent-independent inputs "
                              "(both deviation suprema zero)")
    th = inp.theta
    _, a2, a3 = wf_error_terms(inp, third_moment_coeff=third_moment_coeff)
    c2 = 2.0 * n / th + 2.0 * n * (n - 1) / (th + 1.0)
    c3 = (2.0 * n / th + 6.0 * n * (n - 1) / (th + 1.0)
          + 8.0 * n * (n - 1) * (n - 2) / (3.0 * (th + 2.0)))
    return c2 * a2 + c3 * a3


def crp_empirical_dp_bound(n: int, tf: TestFunctionClass, theta: float) -> float:
    """Bound on the expectation gap between the empirical measure of an n-sample
    and the limit law itself."""
    if n < 1:
        raise ValidationError("n must be >= 1")
    _, d2, d3 = stein_constants(tf, theta)
    return d2 * theta / n + d3 * 2.0 * (n + theta - 1.0) / (3.0 * n * n)


def stationary_types_sq_bound(N: int, p_sup: float) -> float:
    """Second-moment bound for the stationary number of types (natural log)."""
    if N < 3:
        raise DomainError("need N >= 3")
    if not 0 <= p_sup <= 1:
        raise ValidationError("p_sup must be in [0, 1]")
    npq = N * p_sup
    return math.log(N) ** 2 * (4.0 + 12e3 * npq + 6e6 * npq * npq)


def k32_from_types_sq_bound(N: int, p_sup: float) -> float:
    """3/2-moment bound from the second-moment bound via power-mean monotonicity."""
    return stationary_types_sq_bound(N, p_sup) ** 0.75


def binomial_moment_bounds(n: int, p: float) -> tuple[float, float, float]:
    """Bounds on the centered fourth moment, third moment, and second moment
    of a Binomial(n, p) count."""
    if n < 0:
        raise ValidationError("n must be >= 0")
    if not 0 <= p <= 1:
        raise DomainError("p must be in [0, 1]")
    np_ = n * p
    return (3.0 * np_**2 + np_,
            np_**3 + 3.0 * np_**2 + np_,
            np_**2 + np_)


def binomial_central4_exact(n: int, p: float) -> float:
    """Exact centered fourth moment of Binomial(n, p)."""
    if n < 0:
        raise ValidationError("n must be >= 0")
    if not 0 <= p <= 1:
        raise DomainError("p must be in [0, 1]")
    return n * p * (1 - p) * (3 * (n - 2) * p * (1 - p) + 1)
