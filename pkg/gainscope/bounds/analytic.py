"""
gainscope - First-Order Analytic Example

x' = a(theta) x, y = x with a(theta) = -theta1 / (1 + theta2), written in
relative coordinates theta_i = theta*_i (1 + t_i). The storage function
p1 x^2 + p2 e^2 with p2 = -1/a makes the dissipation matrix singular, which
gives a closed-form upper bound p1 and the exact gain p1n.
"""
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from ..polycore import Polynomial, RationalFunction
from ..sysmodel import UncertainSystem, load_system


DEFAULT_THETA_STAR = (1.0, 1.0)
DEFAULT_BOX = ((-0.9, 3.0), (-0.9, 3.0))


@dataclass
class AnalyticFixture:
    """Closed forms in the relative coordinates (t1, t2)."""
    theta_star: Tuple[float, float]
    a_star: float
    a: RationalFunction
    p1: RationalFunction
    p2: RationalFunction
    p1n: RationalFunction
    M: List[List[RationalFunction]]

    def _point(self, theta_tilde: Sequence[float]) -> dict:
        return {"t1": float(theta_tilde[0]), "t2": float(theta_tilde[1])}

    def M_at(self, theta_tilde: Sequence[float]) -> np.ndarray:
        point = self._point(theta_tilde)
        return np.array([[entry.eval(point) for entry in row] for row in self.M])

    def invariant_direction(self) -> Tuple[float, float]:
        """(t1, t2) direction along which a(theta) = a*, i.e. p1 = p1n = 0."""
        _, theta2 = self.theta_star
        return (theta2 / (1.0 + theta2), 1.0)

    def on_invariant_line(self, t2: float) -> Tuple[float, float]:
        d1, d2 = self.invariant_direction()
        return (d1 * t2, d2 * t2)


def analytic_fixture(theta_star: Sequence[float] = DEFAULT_THETA_STAR) -> AnalyticFixture:
    """
    Closed-form certificate and exact gain for the analytic example.

    p2 = -1/a, p1 = (a - a*)^2 / (-2 a* a^2), p1n = (a - a*)^2 / (-2 a a* (a + a*)),
    M = He([[p1 a*, p2 (a* - a)], [0, p2 a + 1/2]]) with M[1][1] = -1 and det M = 0.

    Raises:
        ValueError: If theta* is not componentwise positive
    """
    theta1, theta2 = (float(v) for v in theta_star)
    if theta1 <= 0.0 or theta2 <= 0.0:
        raise ValueError(f"theta* must be componentwise positive, got {tuple(theta_star)}")

    t1, t2 = Polynomial.variable("t1"), Polynomial.variable("t2")
    a_star = -theta1 / (1.0 + theta2)
    a = RationalFunction((t1 + 1.0) * (-theta1), (t2 + 1.0) * theta2 + 1.0)
    delta = a - a_star

    p2 = RationalFunction(-1.0) / a
    p1 = delta * delta / (a * a * (-2.0 * a_star))
    p1n = delta * delta / (a * (a + a_star) * (-2.0 * a_star))

    half = RationalFunction(0.5)
    m11 = p1 * (2.0 * a_star)
    m12 = p2 * (RationalFunction(a_star) - a)
    m22 = (p2 * a + half) * 2.0
    return AnalyticFixture(
        theta_star=(theta1, theta2),
        a_star=a_star,
        a=a,
        p1=p1,
        p2=p2,
        p1n=p1n,
        M=[[m11, m12], [m12, m22]],
    )


def analytic_system_text(
    theta_star: Sequence[float] = DEFAULT_THETA_STAR,
    box: Sequence[Tuple[float, float]] = DEFAULT_BOX,
) -> str:
    """System file for the analytic example, box given in relative coordinates."""
    theta1, theta2 = (float(v) for v in theta_star)
    (l1, h1), (l2, h2) = box
    lo1, hi1 = theta1 * (1.0 + l1), theta1 * (1.0 + h1)
    lo2, hi2 = theta2 * (1.0 + l2), theta2 * (1.0 + h2)
    return "\n".join([
        "# first-order analytic example",
        "[dims]",
        "n = 1",
        "m = 1",
        "p = 1",
        "ntheta = 2",
        "[A]",
        "-t1/(1 + t2)",
        "[B]",
        "0",
        "[C]",
        "1",
        "[D]",
        "0",
        "[nominal]",
        f"theta_star = {theta1!r}, {theta2!r}",
        "[domain]",
        f"g1 = -(t1 - ({lo1!r}))*(t1 - ({hi1!r}))",
        f"g2 = -(t2 - ({lo2!r}))*(t2 - ({hi2!r}))",
        "[box]",
        f"t1 = {lo1!r}, {hi1!r}",
        f"t2 = {lo2!r}, {hi2!r}",
        "[options]",
        "normalize = true",
        "",
    ])


def analytic_system(
    theta_star: Sequence[float] = DEFAULT_THETA_STAR,
    box: Sequence[Tuple[float, float]] = DEFAULT_BOX,
) -> UncertainSystem:
    """The analytic example in relative coordinates on the given box."""
    return load_system(analytic_system_text(theta_star, box))
