"""Steady-state transform algebra for the unreliable M/G/1 queue.

Everything here reduces the breakdown/repair mechanism to an equivalent
M/G/1 queue whose "service" is the generalized completion time H: the raw
service time inflated by every repair interval that interrupts it. The
completion-time LST is S*(h(a)) with the breakdown kernel
h(a) = a + alpha*(1 - R*(a)); all queue-level quantities (idle probability,
availability, sojourn LST, queue/system-size pgfs, Pollaczek-Khinchine
means) follow from it. Multi-source inputs enter through the total arrival
rate; per-source tagging happens in :mod:`aoiq.aoi`.
"""

from __future__ import annotations

from dataclasses import dataclass

from .system import StabilityError, SystemParams

# Reject loads this close to (or beyond) saturation.
STABILITY_MARGIN = 1e-9

# Below these, removable singularities are evaluated by series instead of
# by the raw quotient, which would cancel catastrophically.
_SMALL_A = 1e-8
_SMALL_ONE_MINUS_Z = 1e-8


@dataclass(frozen=True)
class CompletionMoments:
    """First two raw moments of the generalized completion time and the load."""

    eH: float
    eH2: float
    rho: float


def completion_moments(params: SystemParams) -> CompletionMoments:
    """Moments of the completion time H (service plus its own repairs).

    eH = b1*(1 + alpha*g1); eH2 = b2*(1 + alpha*g1)^2 + b1*alpha*g2, where
    b_i and g_i are the raw service and repair moments. Defined regardless
    of stability; rho = total_rate * eH may be >= 1.
    """
    service, repair = params.shared_laws()
    b1, b2 = service.moment(1), service.moment(2)
    g1, g2 = repair.moment(1), repair.moment(2)
    inflate = 1.0 + params.alpha * g1
    eH = b1 * inflate
    eH2 = b2 * inflate * inflate + b1 * params.alpha * g2
    return CompletionMoments(eH=eH, eH2=eH2, rho=params.total_rate * eH)


def completion_third_moment(params: SystemParams) -> float:
    """Third raw moment of H, by the chain rule on S*(h(a)) at a=0."""
    service, repair = params.shared_laws()
    b1, b2, b3 = (service.moment(i) for i in (1, 2, 3))
    g1, g2, g3 = (repair.moment(i) for i in (1, 2, 3))
    a = params.alpha
    inflate = 1.0 + a * g1
    return b3 * inflate**3 + 3.0 * a * b2 * g2 * inflate + a * b1 * g3


def require_stable(params: SystemParams) -> CompletionMoments:
    cm = completion_moments(params)
    if cm.rho >= 1.0 - STABILITY_MARGIN:
        raise StabilityError(cm.rho)
    return cm


def breakdown_kernel(params: SystemParams, a: float) -> float:
    """h(a) = a + alpha*(1 - R*(a)): the repair-inflated transform argument."""
    _, repair = params.shared_laws()
    return a + params.alpha * (1.0 - repair.lst(a))


def _kernel_derivs(params: SystemParams, a: float) -> tuple[float, float]:
    """(h'(a), h''(a)) for the chain rule."""
    _, repair = params.shared_laws()
    d1 = 1.0 - params.alpha * repair.lst_deriv(a, 1)
    d2 = -params.alpha * repair.lst_deriv(a, 2)
    return d1, d2


def completion_lst(params: SystemParams, a: float) -> float:
    """LST of the completion time H: S*(h(a))."""
    service, _ = params.shared_laws()
    return service.lst(breakdown_kernel(params, a))


def _completion_lst_derivs(params: SystemParams, a: float) -> tuple[float, float, float]:
    """(K, K', K'') of K(a) = S*(h(a))."""
    service, _ = params.shared_laws()
    h = breakdown_kernel(params, a)
    h1, h2 = _kernel_derivs(params, a)
    s1 = service.lst_deriv(h, 1)
    k = service.lst(h)
    k1 = s1 * h1
    k2 = service.lst_deriv(h, 2) * h1 * h1 + s1 * h2
    return k, k1, k2


def idle_prob(params: SystemParams) -> float:
    """Steady-state probability the server is idle: 1 - total_rate * eH."""
    cm = require_stable(params)
    return 1.0 - cm.rho


def availability(params: SystemParams) -> float:
    """Steady-state probability the server is not under repair."""
    service, repair = params.shared_laws()
    require_stable(params)
    return 1.0 - params.total_rate * service.moment(1) * params.alpha * repair.moment(1)


def sojourn_lst(params: SystemParams, a: float) -> float:
    """LST of the stationary sojourn time (waiting plus completion).

    W*(a) = a * S*(h(a)) * p0 / (a - lam*(1 - S*(h(a)))). The a -> 0 limit
    is 1; tiny arguments are evaluated by a second-order series in eH, eH2
    to avoid 0/0 cancellation.
    """
    if a < 0.0:
        raise ValueError(f"transform argument must be >= 0, got {a}")
    cm = require_stable(params)
    lam = params.total_rate
    p0 = 1.0 - cm.rho
    if a <= _SMALL_A:
        num = 1.0 - cm.eH * a + 0.5 * cm.eH2 * a * a
        den = p0 + 0.5 * lam * cm.eH2 * a
        return p0 * num / den
    k = completion_lst(params, a)
    return a * k * p0 / (a - lam * (1.0 - k))


def sojourn_lst_deriv(params: SystemParams, a: float, order: int) -> float:
    """Analytic first/second derivative of the sojourn LST.

    Quotient plus chain rule on W* = p0 * a*K(a) / (a - lam + lam*K(a)).
    At a <= 1e-8 the moment identities are returned instead: -E[T] for
    order 1 and E[T^2] (via the second-moment waiting formula) for order 2.
    """
    if order not in (1, 2):
        raise ValueError(f"derivative order must be 1 or 2, got {order}")
    if a < 0.0:
        raise ValueError(f"transform argument must be >= 0, got {a}")
    cm = require_stable(params)
    lam = params.total_rate
    if a <= _SMALL_A:
        et = mean_sojourn(params)
        if order == 1:
            return -et
        ew = mean_waiting(params)
        ew2 = 2.0 * ew * ew + lam * completion_third_moment(params) / (3.0 * (1.0 - cm.rho))
        return ew2 + 2.0 * ew * cm.eH + cm.eH2
    p0 = 1.0 - cm.rho
    k, k1, k2 = _completion_lst_derivs(params, a)
    u = a * k
    u1 = k + a * k1
    u2 = 2.0 * k1 + a * k2
    d = a - lam * (1.0 - k)
    d1 = 1.0 + lam * k1
    d2 = lam * k2
    if order == 1:
        return p0 * (u1 * d - u * d1) / (d * d)
    return p0 * ((u2 * d - u * d2) * d - 2.0 * d1 * (u1 * d - u * d1)) / (d * d * d)


def _phi(params: SystemParams, z: float) -> float:
    """phi(0, z) = h(lam*(1-z)): kernel argument for the pgfs."""
    return breakdown_kernel(params, params.total_rate * (1.0 - z))


def pgf_queue(params: SystemParams, z: float) -> float:
    """pgf of the stationary queue size (excluding any packet in service).

    p0 + (1 - S*(phi))*p0 / (S*(phi) - z); the added p0 makes this a true
    pgf with value 1 at z = 1 (the bare quotient sums only the busy states).
    """
    _check_z(z)
    cm = require_stable(params)
    p0 = 1.0 - cm.rho
    if 1.0 - z <= _SMALL_ONE_MINUS_Z:
        # Series around z=1: slope is the mean queue length lam*E[W].
        return 1.0 - params.total_rate * mean_waiting(params) * (1.0 - z)
    service, _ = params.shared_laws()
    k = service.lst(_phi(params, z))
    return p0 + (1.0 - k) * p0 / (k - z)


def pgf_system(params: SystemParams, z: float) -> float:
    """pgf of the stationary system size: S*(phi)*(1-z)*p0 / (S*(phi) - z)."""
    _check_z(z)
    cm = require_stable(params)
    p0 = 1.0 - cm.rho
    if 1.0 - z <= _SMALL_ONE_MINUS_Z:
        return 1.0 - params.total_rate * mean_sojourn(params) * (1.0 - z)
    service, _ = params.shared_laws()
    k = service.lst(_phi(params, z))
    return k * (1.0 - z) * p0 / (k - z)


def _check_z(z: float) -> None:
    if not 0.0 <= z <= 1.0:
        raise ValueError(f"pgf argument must be in [0, 1], got {z}")


def mean_waiting(params: SystemParams) -> float:
    """Mean queue waiting time: lam*eH2 / (2*(1 - rho))."""
    cm = require_stable(params)
    return params.total_rate * cm.eH2 / (2.0 * (1.0 - cm.rho))


def mean_sojourn(params: SystemParams) -> float:
    """Mean time in system: waiting plus completion."""
    cm = require_stable(params)
    return mean_waiting(params) + cm.eH


def mean_system_size(params: SystemParams) -> float:
    """Mean number in system, lam*E[T] (Little's law)."""
    return params.total_rate * mean_sojourn(params)
