"""Accounting of played games and aggregation into traffic metrics.

The raw record schema is shared with both simulation engines: one float64
row per game with the columns in REC_COLUMNS.  Actions are 1-based pairs,
sigma is the signed side payment (positive: A pays B), dt_a/dt_b are the
realized time gains (td_a if A changed lanes, td_b if B held its lane,
otherwise zero).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

KLASS_TV_HIGH = 0
KLASS_TV_LOW = 1
KLASS_NTV = 2
KLASS_NAMES = ("tv_high", "tv_low", "ntv")

KIND_TU = 0
KIND_NTU = 1
KIND_NAMES = ("TU", "NTU")

REC_COLUMNS = (
    "step", "a_id", "b_id", "kind", "action_i", "action_j", "sigma",
    "td_a", "td_b", "dt_a", "dt_b",
    "cvot_decl_a", "cvot_decl_b", "cvot_true_a", "cvot_true_b",
)
REC_WIDTH = len(REC_COLUMNS)
_COL = {name: k for k, name in enumerate(REC_COLUMNS)}


@dataclass(frozen=True)
class GameRecord:
    """One played game, decoded from a raw ledger row."""

    step: int
    a_id: int
    b_id: int
    kind: str
    action: tuple[int, int]
    sigma: float
    td_a: float
    td_b: float
    dt_a: float
    dt_b: float
    cvot_decl_a: float
    cvot_decl_b: float
    cvot_true_a: float
    cvot_true_b: float

    @classmethod
    def from_row(cls, row) -> "GameRecord":
        return cls(
            step=int(row[_COL["step"]]),
            a_id=int(row[_COL["a_id"]]),
            b_id=int(row[_COL["b_id"]]),
            kind=KIND_NAMES[int(row[_COL["kind"]])],
            action=(int(row[_COL["action_i"]]), int(row[_COL["action_j"]])),
            sigma=float(row[_COL["sigma"]]),
            td_a=float(row[_COL["td_a"]]),
            td_b=float(row[_COL["td_b"]]),
            dt_a=float(row[_COL["dt_a"]]),
            dt_b=float(row[_COL["dt_b"]]),
            cvot_decl_a=float(row[_COL["cvot_decl_a"]]),
            cvot_decl_b=float(row[_COL["cvot_decl_b"]]),
            cvot_true_a=float(row[_COL["cvot_true_a"]]),
            cvot_true_b=float(row[_COL["cvot_true_b"]]),
        )


@dataclass
class ClassBenefit:
    """Aggregated per-class money/time accounting (per hour of travel)."""

    klass: str
    beta: float
    income_per_h: float
    time_saved_s_per_h: float
    n_vehicles: int
    n_game_entries: int
    mean_travel_h: float


class GameLedger:
    """Append-only store of played games plus per-vehicle travel accounting.

    Aggregates (time gained, net income) are folded per vehicle as chunks
    arrive, counting only games at steps >= warmup; the raw rows are kept
    only when keep_records is set.  Vehicle metadata is registered by the
    simulation as vehicles enter and leave.
    """

    def __init__(self, warmup: int = 0, keep_records: bool = True):
        self.warmup = int(warmup)
        self.keep_records = keep_records
        self._chunks: list[np.ndarray] = []
        self._cap = 256
        self._dt_sum = np.zeros(self._cap)
        self._income_sum = np.zeros(self._cap)
        self._n_games = np.zeros(self._cap, dtype=np.int64)
        self._klass = np.full(self._cap, -1, dtype=np.int64)
        self._cvot_true = np.zeros(self._cap)
        self._entry = np.zeros(self._cap, dtype=np.int64)
        self._exit = np.full(self._cap, -1, dtype=np.int64)
        self._distance = np.zeros(self._cap, dtype=np.int64)
        self._max_id = -1
        self._net_payment = 0.0
        self.end_step = 0

    # -- vehicle registry -------------------------------------------------

    def _grow(self, max_id: int):
        if max_id < self._cap:
            return
        new_cap = max(self._cap * 2, max_id + 1)
        for name in ("_dt_sum", "_income_sum", "_n_games", "_klass",
                     "_cvot_true", "_entry", "_exit", "_distance"):
            old = getattr(self, name)
            grown = np.zeros(new_cap, dtype=old.dtype)
            if name == "_klass":
                grown[:] = -1
            elif name == "_exit":
                grown[:] = -1
            grown[: self._cap] = old
            setattr(self, name, grown)
        self._cap = new_cap

    def register_vehicles(self, ids, klass, cvot_true, entry_step):
        ids = np.asarray(ids, dtype=np.int64)
        if ids.size == 0:
            return
        self._grow(int(ids.max()))
        self._max_id = max(self._max_id, int(ids.max()))
        self._klass[ids] = klass
        self._cvot_true[ids] = cvot_true
        self._entry[ids] = entry_step

    def retire_vehicles(self, ids, exit_step: int):
        ids = np.asarray(ids, dtype=np.int64)
        if ids.size:
            self._exit[ids] = exit_step

    def add_distance(self, ids, cells):
        np.add.at(self._distance, ids, cells)

    # -- game records ------------------------------------------------------

    def add_chunk(self, chunk: np.ndarray):
        """Fold one step's records into the per-vehicle aggregates."""
        if chunk.size == 0:
            return
        if self.keep_records:
            self._chunks.append(chunk)
        rows = chunk[chunk[:, _COL["step"]] >= self.warmup]
        if rows.size == 0:
            return
        a_ids = rows[:, _COL["a_id"]].astype(np.int64)
        b_ids = rows[:, _COL["b_id"]].astype(np.int64)
        sigma = rows[:, _COL["sigma"]]
        np.add.at(self._dt_sum, a_ids, rows[:, _COL["dt_a"]])
        np.add.at(self._dt_sum, b_ids, rows[:, _COL["dt_b"]])
        np.add.at(self._income_sum, a_ids, -sigma)
        np.add.at(self._income_sum, b_ids, sigma)
        np.add.at(self._n_games, a_ids, 1)
        np.add.at(self._n_games, b_ids, 1)
        # pairwise the two signed payments of one game cancel exactly
        self._net_payment += float(np.sum(-sigma + sigma))

    @property
    def records(self) -> np.ndarray:
        """All raw rows, (N, REC_WIDTH); requires keep_records."""
        if not self.keep_records:
            raise ValueError("ledger was aggregated without raw records")
        if not self._chunks:
            return np.empty((0, REC_WIDTH))
        return np.concatenate(self._chunks, axis=0)

    def iter_records(self):
        for row in self.records:
            yield GameRecord.from_row(row)

    @property
    def n_records(self) -> int:
        return sum(c.shape[0] for c in self._chunks) if self.keep_records else -1

    def net_payment_total(self) -> float:
        """Sum of all signed payments; exactly zero by construction."""
        return self._net_payment

    # -- aggregation --------------------------------------------------------

    def _vehicle_ids(self, klass) -> np.ndarray:
        known = np.flatnonzero(self._klass >= 0)
        if klass in (None, "all"):
            return known
        if klass == "tv":
            return known[np.isin(self._klass[known], (KLASS_TV_HIGH, KLASS_TV_LOW))]
        if isinstance(klass, str):
            klass = KLASS_NAMES.index(klass)
        return known[self._klass[known] == klass]

    def travel_seconds(self, ids, dt: float = 1.0) -> np.ndarray:
        """Per-vehicle time spent in the measurement window [warmup, end]."""
        entry = np.maximum(self._entry[ids], self.warmup)
        exit_ = np.where(self._exit[ids] >= 0, self._exit[ids], self.end_step)
        return np.maximum(exit_ - entry, 0) * dt

    def class_benefit(self, klass, dt: float = 1.0) -> ClassBenefit | None:
        """Money/time aggregates of one vehicle class, per hour of travel.

        beta sums each member's VOT-weighted time gains plus net income over
        all its games and normalizes by the class mean travel time in hours.
        None when no vehicle of the class was present.
        """
        ids = self._vehicle_ids(klass)
        if ids.size == 0:
            return None
        travel_h = self.travel_seconds(ids, dt) / 3600.0
        mean_travel_h = float(travel_h.mean())
        name = klass if isinstance(klass, str) else KLASS_NAMES[klass]
        n_entries = int(self._n_games[ids].sum())
        if mean_travel_h == 0.0:
            return ClassBenefit(name, 0.0, 0.0, 0.0, ids.size, n_entries, 0.0)
        gains = self._cvot_true[ids] * self._dt_sum[ids] + self._income_sum[ids]
        return ClassBenefit(
            klass=name,
            beta=float(gains.sum()) / mean_travel_h,
            income_per_h=float(self._income_sum[ids].sum()) / mean_travel_h,
            time_saved_s_per_h=float(self._dt_sum[ids].sum()) / mean_travel_h,
            n_vehicles=ids.size,
            n_game_entries=n_entries,
            mean_travel_h=mean_travel_h,
        )

    def benefit_index(self, klass, dt: float = 1.0) -> float | None:
        """The scalar benefit of a class, or None when the class is empty."""
        agg = self.class_benefit(klass, dt)
        return None if agg is None else agg.beta

    def relative_benefit(self, klass, dt: float = 1.0) -> float | None:
        """Benefit relative to the class's VOT-weighted value of travel time."""
        ids = self._vehicle_ids(klass)
        if ids.size == 0:
            return None
        travel_s = self.travel_seconds(ids, dt)
        value = float((self._cvot_true[ids] * travel_s).sum())
        if value == 0.0:
            return 0.0
        gains = self._cvot_true[ids] * self._dt_sum[ids] + self._income_sum[ids]
        return float(gains.sum()) / value


# ---------------------------------------------------------------------------
# run history and spatial aggregation


@dataclass
class RunHistory:
    """Per-step aggregates (and optional snapshots) of one simulation run.

    class_mean[t] holds the mean speed (cells/step) of rows
    (tv_high, tv_low, ntv, all) after step t-1; row 0 is the initial state.
    snapshots, when recorded, hold one (pos, lane, v) triple per step.
    """

    n_cells: int
    cell_length: float
    dt: float
    n_lanes: int
    v_max: int
    warmup: int
    steps: int
    class_mean: np.ndarray
    class_count: np.ndarray
    snapshots: list[tuple[np.ndarray, np.ndarray, np.ndarray]] | None = None

    @property
    def road_km(self) -> float:
        return self.n_cells * self.cell_length / 1000.0

    @property
    def kmh_per_cell(self) -> float:
        return self.cell_length / self.dt * 3.6

    def window(self) -> slice:
        """Measurement rows: post-step states from warmup on."""
        return slice(self.warmup + 1, self.steps + 1)


def speed_density_aggregate(history: RunHistory) -> list[dict]:
    """Per-class (global density veh/km/lane, mean speed km/h) of one run.

    Speeds are arithmetic means of the recorded per-step class means over
    the measurement window; classes never present yield no row.
    """
    rows = []
    sl = history.window()
    counts = history.class_count[sl]
    means = history.class_mean[sl]
    if counts.shape[0] == 0:
        return rows
    density = float(counts[:, 3].mean()) / (history.road_km * history.n_lanes)
    for k, name in enumerate(KLASS_NAMES + ("all",)):
        present = counts[:, k] > 0
        if not present.any():
            continue
        mean_cells = float(means[present, k].mean())
        rows.append({
            "density_veh_km": density,
            "class": name,
            "mean_speed_kmh": mean_cells * history.kmh_per_cell,
        })
    return rows


def heatmap_accumulate(history: RunHistory, time_bin: int = 10,
                       space_bin: int = 5):
    """Space-time grid of mean speed (cells/step), lanes pooled.

    Returns (grid, mask): rows are time bins over the full run, columns
    space bins; mask marks bins that contained at least one vehicle, grid
    holds NaN elsewhere.
    """
    if history.snapshots is None:
        raise ValueError("heatmap needs a run recorded with snapshots")
    n_t = (history.steps + time_bin - 1) // time_bin
    n_x = (history.n_cells + space_bin - 1) // space_bin
    speed_sum = np.zeros((n_t, n_x))
    count = np.zeros((n_t, n_x), dtype=np.int64)
    for t, (pos, _lane, v) in enumerate(history.snapshots):
        tb = t // time_bin
        xb = pos // space_bin
        np.add.at(speed_sum[tb], xb, v)
        np.add.at(count[tb], xb, 1)
    mask = count > 0
    grid = np.full((n_t, n_x), np.nan)
    grid[mask] = speed_sum[mask] / count[mask]
    return grid, mask


def _cluster_circular(cells: np.ndarray, n_cells: int, gap: int):
    """Split sorted cell indices into runs separated by more than gap,
    joining the wrap-around pair on the ring."""
    if cells.size == 0:
        return []
    breaks = np.flatnonzero(np.diff(cells) > gap)
    clusters = np.split(cells, breaks + 1)
    if len(clusters) > 1 and (cells[0] + n_cells - cells[-1]) <= gap:
        wrapped = np.concatenate([clusters[-1] - n_cells, clusters[0]])
        clusters = [wrapped] + clusters[1:-1]
    return clusters


def find_backward_band(grid: np.ndarray, mask: np.ndarray, n_cells: int,
                       low_speed: float = 1.0, gap: int = 6,
                       min_size: int = 3, max_jump: float = 30.0,
                       min_length: int = 120):
    """Most negative space-time slope (cells/step) among tracked low-speed
    bands, or None when no band persists long enough.

    Per time row, low-speed occupied cells are clustered circularly; the
    largest cluster's centroid is followed across rows (unwrapped on the
    ring) and each track of at least min_length rows is fit by least
    squares.
    """
    n_t = grid.shape[0]
    centroids = np.full(n_t, np.nan)
    for t in range(n_t):
        cells = np.flatnonzero(mask[t] & (grid[t] <= low_speed))
        clusters = _cluster_circular(cells, n_cells, gap)
        clusters = [c for c in clusters if c.size >= min_size]
        if clusters:
            big = max(clusters, key=lambda c: c.size)
            centroids[t] = float(big.mean()) % n_cells

    best = None
    t = 0
    while t < n_t:
        if math.isnan(centroids[t]):
            t += 1
            continue
        ts = [t]
        xs = [centroids[t]]
        u = t + 1
        while u < n_t and not math.isnan(centroids[u]):
            step = (centroids[u] - (xs[-1] % n_cells) + n_cells / 2) % n_cells - n_cells / 2
            if abs(step) > max_jump:
                break
            ts.append(u)
            xs.append(xs[-1] + step)
            u += 1
        if len(ts) >= min_length:
            slope = float(np.polyfit(ts, xs, 1)[0])
            if best is None or slope < best:
                best = slope
        t = u if u > t + 1 else t + 1
    return best
