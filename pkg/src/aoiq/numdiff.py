"""Richardson-extrapolated finite differences.

Cross-check machinery for the analytic transform derivatives. The default
step and refinement depth give ~1e-9 relative accuracy on smooth transforms
while staying clear of cancellation.
"""

from __future__ import annotations

from typing import Callable


def central_derivative(
    f: Callable[[float], float],
    x: float,
    order: int = 1,
    initial_step: float | None = None,
    levels: int = 2,
) -> float:
    """Central finite difference of `f` at `x` with Richardson extrapolation.

    `order` is 1 or 2. The initial step defaults to 1e-3 * max(1, |x|) and is
    halved `levels` times; each level cancels the next error term of the
    O(h^2) central stencils.
    """
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    h = initial_step if initial_step is not None else 1e-3 * max(1.0, abs(x))

    def stencil(step: float) -> float:
        if order == 1:
            return (f(x + step) - f(x - step)) / (2.0 * step)
        return (f(x + step) - 2.0 * f(x) + f(x - step)) / (step * step)

    table = [stencil(h / 2.0**i) for i in range(levels + 1)]
    for lev in range(1, levels + 1):
        factor = 4.0**lev
        table = [
            (factor * table[i + 1] - table[i]) / (factor - 1.0)
            for i in range(len(table) - 1)
        ]
    return table[0]


def backward_derivative_at_one(f: Callable[[float], float], h: float = 1e-3) -> float:
    """One-sided derivative of `f` at x=1 using points in [1-2h, 1].

    Used for pgf slopes at the domain edge z=1 where central stencils would
    leave [0, 1]. Three-point backward stencil (error series h^2, h^3, ...)
    with two Richardson levels. The step must stay well above the pgf's
    series-limit window near z=1, where the raw quotient cancels.
    """

    def stencil(step: float) -> float:
        return (3.0 * f(1.0) - 4.0 * f(1.0 - step) + f(1.0 - 2.0 * step)) / (2.0 * step)

    d0 = stencil(h)
    d1 = stencil(h / 2.0)
    d2 = stencil(h / 4.0)
    r0 = (4.0 * d1 - d0) / 3.0
    r1 = (4.0 * d2 - d1) / 3.0
    return (8.0 * r1 - r0) / 7.0
