"""Adaptive Simpson quadrature with interval bisection."""
import math

__all__ = ["adaptive_simpson", "QuadratureError"]


class QuadratureError(ArithmeticError):
    pass


def adaptive_simpson(f, a, b, tol=1e-9, max_depth=60):
    """Integrate ``f`` over [a, b] to absolute tolerance ``tol``.

    Each panel is split in two until the Richardson estimate of its error
    falls below its share of ``tol``; the extrapolated value is returned.
    Panels that hit ``max_depth`` are accepted as they are.
    """
    if a == b:
        return 0.0
    if b < a:
        return -adaptive_simpson(f, b, a, tol, max_depth)
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    total = 0.0
    # Explicit stack: (a, b, fa, fm, fb, whole, tol, depth)
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    while stack:
        a, b, fa, fm, fb, whole, eps, depth = stack.pop()
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        delta = left + right - whole
        if not math.isfinite(delta):
            raise QuadratureError(f"non-finite integrand on [{a}, {b}]")
        if depth >= max_depth or abs(delta) <= 15.0 * eps:
            total += left + right + delta / 15.0
        else:
            stack.append((m, b, fm, frm, fb, right, 0.5 * eps, depth + 1))
            stack.append((a, m, fa, flm, fm, left, 0.5 * eps, depth + 1))
    return total
