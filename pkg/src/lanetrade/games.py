"""Two-player lane-change games: time differences, utility matrices, solvers.

The lane-change conflict is a 2x2 game between the vehicle that wants to
change lanes (A, row player) and the lag vehicle in the target lane (B,
column player).  Actions are 1-based throughout: for A, 1 = change lanes,
2 = stay; for B, 1 = hold (do not give way), 2 = yield (give way).

Money is in dollars, time in seconds, speeds in m/s.  Value-of-time rates
are dollars per second (configuration layers convert from dollars/hour).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Collision penalty dominating any tradable utility by many orders of
# magnitude; its exact value never influences a solved outcome.
M_DEFAULT = 1.0e6

# Preference order used to break ties in the joint-action argmax: the status
# quo wins, then "B holds", then "A changes".  Zero-gain games therefore move
# no money and trigger no maneuver.  0-based (row, col) cells.
_ARGMAX_ORDER = ((1, 1), (1, 0), (0, 1), (0, 0))


class GameError(ValueError):
    """Invalid input to a game construction or solver."""


@dataclass(frozen=True)
class SpeedScenario:
    """Speed bundle for one vehicle's high/low choice during an equilibration.

    v1/v2 are the higher/lower speed choice, ve the equilibrium speed the
    vehicle relaxes to afterwards, ta the lane-change completion time, and
    a1/a2 the signed rates that take v1 -> ve and v2 -> ve (deceleration
    negative).  v0 is the speed before the episode; it is informational and
    does not enter the time difference.
    """

    v1: float
    v2: float
    ve: float
    ta: float
    a1: float
    a2: float
    v0: float | None = None

    def __post_init__(self):
        if self.v2 < 0 or self.v1 < self.v2:
            raise GameError(f"need v1 >= v2 >= 0, got v1={self.v1}, v2={self.v2}")
        if self.ve <= 0:
            raise GameError(f"equilibrium speed must be positive, got {self.ve}")
        if self.ta <= 0:
            raise GameError(f"lane-change time must be positive, got {self.ta}")
        if self.a1 == 0 or self.a2 == 0:
            raise GameError("rates a1, a2 must be nonzero")

    @classmethod
    def symmetric(cls, v1, v2, ve, ta, a, v0=None):
        """Convenience for a single magnitude a: decelerate at -a, accelerate at +a."""
        if a <= 0:
            raise GameError(f"symmetric rate must be positive, got {a}")
        return cls(v1=v1, v2=v2, ve=ve, ta=ta, a1=-a, a2=a, v0=v0)


def time_difference(s: SpeedScenario) -> float:
    """Average travel time saved by taking the higher speed choice.

    Closed form of the trajectory-area geometry: the distance gained over
    the lower-speed trajectory during the episode, divided by the
    equilibrium speed.  The three terms are the linear ramp up to ta and
    the two constant-rate legs joining v1 and v2 to ve.
    """
    dv1 = s.ve - s.v1
    dv2 = s.ve - s.v2
    gain = (s.v1 - s.v2) * s.ta + dv1 * dv1 / (-s.a1) + dv2 * dv2 / s.a2
    td = gain / (2.0 * s.ve)
    if td < 0:
        # Consistent sign conventions cannot make the distance gain negative;
        # a negative value means the caller passed rates with the wrong signs.
        raise GameError(
            f"negative time difference ({td:.6g} s); check the signs of a1/a2"
        )
    return td


@dataclass(frozen=True)
class BimatrixGame:
    """Paired 2x2 payoff tables (dollars) for vehicles A and B.

    a[i][j] / b[i][j] are the payoffs under A-action i+1 and B-action j+1
    (0-based storage).  m is the collision penalty appearing at cell (1,1).
    """

    a: np.ndarray
    b: np.ndarray
    m: float = M_DEFAULT

    def __post_init__(self):
        object.__setattr__(self, "a", np.asarray(self.a, dtype=np.float64))
        object.__setattr__(self, "b", np.asarray(self.b, dtype=np.float64))
        if self.a.shape != (2, 2) or self.b.shape != (2, 2):
            raise GameError("payoff tables must be 2x2")
        if not (np.isfinite(self.a).all() and np.isfinite(self.b).all()):
            raise GameError("payoff tables must be finite")

    @property
    def a12(self) -> float:
        """A's gain from changing lanes while B yields."""
        return float(self.a[0, 1])

    @property
    def b21(self) -> float:
        """B's gain from holding its lane while A stays."""
        return float(self.b[1, 0])

    def has_conflict_structure(self) -> bool:
        """True if the tables match the canonical lane-change shape:
        crash cell -m at (1,1), zero datum elsewhere, nonnegative gains."""
        a, b = self.a, self.b
        return (
            a[0, 0] == -self.m
            and b[0, 0] == -self.m
            and a[1, 0] == 0.0
            and a[1, 1] == 0.0
            and b[0, 1] == 0.0
            and b[1, 1] == 0.0
            and a[0, 1] >= 0.0
            and b[1, 0] >= 0.0
        )

    def scaled(self, lam: float) -> "BimatrixGame":
        return BimatrixGame(a=self.a * lam, b=self.b * lam, m=self.m * lam)


def build_utility_matrix(cvot_a, td_a, cvot_b, td_b, m=M_DEFAULT) -> BimatrixGame:
    """Build the canonical conflict game from VOT rates ($/s) and time gains (s).

    A earns cvot_a*td_a only by changing lanes while B yields; B earns
    cvot_b*td_b only by holding its lane while A stays; the remaining
    cells are the zero datum except the crash cell (-m, -m).
    """
    if cvot_a < 0 or cvot_b < 0:
        raise GameError("VOT rates must be nonnegative")
    if td_a < 0 or td_b < 0:
        raise GameError("time differences must be nonnegative")
    gain_a = cvot_a * td_a
    gain_b = cvot_b * td_b
    if m <= gain_a + gain_b:
        raise GameError(
            f"crash penalty m={m} must dominate tradable utility {gain_a + gain_b}"
        )
    a = np.array([[-m, gain_a], [0.0, 0.0]])
    b = np.array([[-m, 0.0], [gain_b, 0.0]])
    return BimatrixGame(a=a, b=b, m=m)


@dataclass(frozen=True)
class ZeroSumSolution:
    """Value and optimal strategy of a 2x2 zero-sum game (row maximizes).

    saddle is the 1-based pure cell when one exists, else None; p is the
    probability of row 1 and q the probability of column 1 (degenerate 0/1
    probabilities in the saddle case).
    """

    value: float
    p: float
    q: float
    saddle: tuple[int, int] | None


def solve_zero_sum_2x2(d) -> ZeroSumSolution:
    """Solve the zero-sum game on table d (row player maximizes).

    Checks maximin == minimax for a pure saddle first; otherwise returns the
    mixed value (d11*d22 - d12*d21) / [(d11 - d12) + (d22 - d21)] with the
    indifference probabilities.
    """
    d = np.asarray(d, dtype=np.float64)
    if d.shape != (2, 2):
        raise GameError("zero-sum table must be 2x2")
    if not np.isfinite(d).all():
        raise GameError("zero-sum table must be finite")

    row_mins = d.min(axis=1)
    col_maxs = d.max(axis=0)
    maximin = row_mins.max()
    minimax = col_maxs.min()
    if maximin == minimax:
        i = int(np.argmax(row_mins))
        j = int(np.argmin(col_maxs))
        return ZeroSumSolution(
            value=float(maximin),
            p=1.0 if i == 0 else 0.0,
            q=1.0 if j == 0 else 0.0,
            saddle=(i + 1, j + 1),
        )

    denom = (d[0, 0] - d[0, 1]) + (d[1, 1] - d[1, 0])
    # Without a saddle the diagonal pairs strictly dominate in opposite
    # directions, so the denominator cannot vanish.
    assert denom != 0.0, "no-saddle 2x2 game with zero indifference denominator"
    value = (d[0, 0] * d[1, 1] - d[0, 1] * d[1, 0]) / denom
    p = (d[1, 1] - d[1, 0]) / denom
    q = (d[1, 1] - d[0, 1]) / denom
    return ZeroSumSolution(value=float(value), p=float(p), q=float(q), saddle=None)


@dataclass(frozen=True)
class TuOutcome:
    """Solved transferable-utility game.

    sigma is the side payment, signed so that positive means A pays B.
    theta is the value of the zero-sum threat game on (A - B), i.e. the
    difference of the threat payoffs.  The threat pair is reported as the
    symmetric split (theta/2, -theta/2); only its difference is pinned by
    the bargaining model and it is (0, 0) for canonical conflict games.
    """

    omega_star: float
    action: tuple[int, int]
    sigma: float
    payoff_a: float
    payoff_b: float
    theta: float
    threat: tuple[float, float] = field(default=(0.0, 0.0))


def solve_tu(g: BimatrixGame) -> TuOutcome:
    """Solve the side-payment game: maximize the joint payoff, split so both
    sides stand the same distance from their threat payoffs.

    The joint action is the argmax of A+B (status quo preferred on ties),
    the threat difference theta comes from the zero-sum game on A-B, and the
    side payment is sigma = A[action] - (theta + omega*)/2 (positive: A pays
    B and changes lanes; negative: B pays A and holds its lane).
    """
    totals = g.a + g.b
    action0 = _ARGMAX_ORDER[0]
    for cell in _ARGMAX_ORDER[1:]:
        if totals[cell] > totals[action0]:
            action0 = cell
    omega_star = float(totals[action0])

    theta = solve_zero_sum_2x2(g.a - g.b).value
    payoff_a = (theta + omega_star) / 2.0
    payoff_b = (omega_star - theta) / 2.0
    sigma = float(g.a[action0]) - payoff_a
    return TuOutcome(
        omega_star=omega_star,
        action=(action0[0] + 1, action0[1] + 1),
        sigma=sigma,
        payoff_a=payoff_a,
        payoff_b=payoff_b,
        theta=theta,
        threat=(theta / 2.0 + 0.0, -theta / 2.0 + 0.0),
    )


@dataclass(frozen=True)
class NtuOutcome:
    """Solved bargaining game (no money moves).

    n_a/n_b are the bargaining payoffs; realized_action is the coin-resolved
    joint action, (1, 2) or (2, 1) (or (2, 2) for a fully degenerate game).
    """

    n_a: float
    n_b: float
    realized_action: tuple[int, int]
    status_quo: tuple[float, float] = field(default=(0.0, 0.0))


def solve_ntu(g: BimatrixGame, coin) -> NtuOutcome:
    """Solve the no-transfer game by symmetric bargaining from the (0, 0)
    status quo and realize one of the two pure conflict outcomes.

    The product of gains is maximized at the midpoint of the segment joining
    (A12, 0) and (0, B21), giving (A12/2, B21/2); the physical outcome is
    (1,2) or (2,1) with probability one half each, drawn from coin (any
    object with a .random() -> [0,1) method).  A game with no gains on
    either side degenerates to the status quo action (2, 2).
    """
    if not g.has_conflict_structure():
        raise GameError(
            "bargaining closed form only applies to canonical conflict matrices"
        )
    n_a = g.a12 / 2.0
    n_b = g.b21 / 2.0
    if g.a12 == 0.0 and g.b21 == 0.0:
        return NtuOutcome(n_a=0.0, n_b=0.0, realized_action=(2, 2))
    realized = (1, 2) if coin.random() < 0.5 else (2, 1)
    return NtuOutcome(n_a=n_a, n_b=n_b, realized_action=realized)
