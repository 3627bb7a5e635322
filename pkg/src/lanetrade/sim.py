"""Two-lane traffic cellular automaton with negotiated lane changes.

Update cycle per step (vehicles processed downstream-most first where order
matters): accelerate, cap candidate speeds by half the gap to the leader in
the subject/target lane, decrement both candidates once with probability
p_sd, resolve every lane-change conflict against the nearest lag vehicle in
the target lane as a 2x2 game (side-payment game between two transaction
vehicles, coin-resolved bargaining otherwise), then commit lane flips and
advance every vehicle by its final speed.

Two engines produce bit-identical trajectories: a plain-Python reference
implementation built on the public game solvers (this module) and a numba
kernel (_kernel.py) used for production runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import games
from .ledger import (
    GameLedger,
    KIND_NTU,
    KIND_TU,
    KLASS_NTV,
    KLASS_TV_HIGH,
    KLASS_TV_LOW,
    KLASS_NAMES,
    REC_WIDTH,
    RunHistory,
)
from .streams import (
    TAG_CLASS_HIGH,
    TAG_CLASS_TV,
    TAG_COIN,
    TAG_INJECT,
    TAG_SLOWDOWN,
    KeyedCoin,
    placement_rng,
    uniform01,
)

# Distance sentinel for "no leader"; its half-gap cap exceeds any speed.
FAR = 1 << 30

VE_FLOOR = 0.1  # m/s, keeps the time-difference formula well-defined in jams
SPARSE_CLASS = 5  # below this many vehicles a class borrows the global mean


class SimError(ValueError):
    """Invalid simulation configuration or state."""


@dataclass(frozen=True)
class SimConfig:
    """Static parameters of one simulation instance.

    Speeds are in cells/step, VOT rates in dollars/hour (converted to
    dollars/second internally), ta in seconds.
    """

    cell_length: float = 7.5
    n_cells: int = 2700
    dt: float = 1.0
    v_max: int = 5
    a_pos: float = 1.0
    a_neg: float = -1.0
    n_lanes: int = 2
    p_sd: float = 1.0 / 3.0
    ta: float = 3.0
    boundary: str = "ring"
    inflow_rate: float = 0.3
    tv_penetration: float = 1.0
    vot_high: float = 25.0
    vot_low: float = 10.0
    high_low_ratio: float = 0.2
    untruthful_mode: str = "none"
    seed: int = 1
    ve_window: int = 60

    def __post_init__(self):
        if self.n_lanes != 2:
            raise SimError("the model is defined for exactly two lanes")
        if self.cell_length <= 0 or self.dt <= 0:
            raise SimError("cell_length and dt must be positive")
        if self.n_cells < 2:
            raise SimError("need at least two cells")
        if self.v_max < 1:
            raise SimError("v_max must be at least 1")
        if not 0.0 <= self.p_sd <= 1.0:
            raise SimError("p_sd must be a probability")
        if self.a_pos <= 0 or self.a_neg >= 0:
            raise SimError("a_pos must be positive and a_neg negative")
        if self.ta <= 0:
            raise SimError("ta must be positive")
        if self.boundary not in ("ring", "open"):
            raise SimError(f"unknown boundary {self.boundary!r}")
        if not 0.0 <= self.inflow_rate <= 1.0:
            raise SimError("inflow_rate is a per-lane Bernoulli rate in [0, 1]")
        if not 0.0 <= self.tv_penetration <= 1.0:
            raise SimError("tv_penetration must be in [0, 1]")
        if not 0.0 <= self.high_low_ratio <= 1.0:
            raise SimError("high_low_ratio must be in [0, 1]")
        if self.vot_high < 0 or self.vot_low < 0:
            raise SimError("VOT rates must be nonnegative")
        if self.untruthful_mode not in ("none", "high_declares_low", "low_declares_high"):
            raise SimError(f"unknown untruthful_mode {self.untruthful_mode!r}")
        if self.ve_window < 1:
            raise SimError("ve_window must be at least 1")

    # unit conversions used identically by both engines
    @property
    def cells_to_ms(self) -> float:
        return self.cell_length / self.dt

    @property
    def a_pos_ms(self) -> float:
        return self.a_pos * self.cell_length / (self.dt * self.dt)

    @property
    def a_neg_ms(self) -> float:
        return self.a_neg * self.cell_length / (self.dt * self.dt)

    @property
    def cvot_high_s(self) -> float:
        return self.vot_high / 3600.0

    @property
    def cvot_low_s(self) -> float:
        return self.vot_low / 3600.0

    @property
    def road_km(self) -> float:
        return self.n_cells * self.cell_length / 1000.0

    @property
    def jam_density(self) -> float:
        """Vehicles per km per lane with every cell occupied."""
        return 1000.0 / self.cell_length

    @property
    def ring(self) -> bool:
        return self.boundary == "ring"

    def with_overrides(self, **kw) -> "SimConfig":
        return replace(self, **kw)


@dataclass
class VehicleState:
    """Snapshot view of one vehicle (lanes and classes are 0-based ints)."""

    id: int
    lane: int
    cell: int
    v: int
    klass: int
    cvot_true: float
    cvot_declared: float
    entry_step: int

    @property
    def klass_name(self) -> str:
        return KLASS_NAMES[self.klass]


class Lattice:
    """Columnar vehicle state of the 2 x n_cells grid."""

    def __init__(self, n_cells, ids, pos, lane, v, klass, cvot_true, cvot_decl,
                 entry_step, step_index=0):
        self.n_cells = int(n_cells)
        self.ids = np.asarray(ids, dtype=np.int64)
        self.pos = np.asarray(pos, dtype=np.int64)
        self.lane = np.asarray(lane, dtype=np.int64)
        self.v = np.asarray(v, dtype=np.int64)
        self.klass = np.asarray(klass, dtype=np.int64)
        self.cvot_true = np.asarray(cvot_true, dtype=np.float64)
        self.cvot_decl = np.asarray(cvot_decl, dtype=np.float64)
        self.entry_step = np.asarray(entry_step, dtype=np.int64)
        self.step_index = int(step_index)
        self.check_consistent()

    @property
    def n(self) -> int:
        return self.pos.size

    def check_consistent(self):
        if self.n and (self.pos.min() < 0 or self.pos.max() >= self.n_cells):
            raise SimError("vehicle position outside the lattice")
        slots = self.lane * self.n_cells + self.pos
        if np.unique(slots).size != self.n:
            raise SimError("two vehicles occupy one cell")

    def occupancy(self) -> np.ndarray:
        """(2, n_cells) grid of vehicle ids, -1 where empty."""
        occ = np.full((2, self.n_cells), -1, dtype=np.int64)
        occ[self.lane, self.pos] = self.ids
        return occ

    def vehicles(self) -> list[VehicleState]:
        return [
            VehicleState(
                id=int(self.ids[i]), lane=int(self.lane[i]), cell=int(self.pos[i]),
                v=int(self.v[i]), klass=int(self.klass[i]),
                cvot_true=float(self.cvot_true[i]),
                cvot_declared=float(self.cvot_decl[i]),
                entry_step=int(self.entry_step[i]),
            )
            for i in range(self.n)
        ]

    def index_of(self, vehicle_id: int) -> int:
        hits = np.flatnonzero(self.ids == vehicle_id)
        if hits.size != 1:
            raise SimError(f"vehicle id {vehicle_id} not present")
        return int(hits[0])

    def keep(self, mask: np.ndarray):
        for name in ("ids", "pos", "lane", "v", "klass", "cvot_true",
                     "cvot_decl", "entry_step"):
            setattr(self, name, getattr(self, name)[mask])

    def append(self, **fields):
        for name, value in fields.items():
            old = getattr(self, name)
            setattr(self, name, np.append(old, np.asarray(value, dtype=old.dtype)))

    def copy(self) -> "Lattice":
        return Lattice(
            self.n_cells, self.ids.copy(), self.pos.copy(), self.lane.copy(),
            self.v.copy(), self.klass.copy(), self.cvot_true.copy(),
            self.cvot_decl.copy(), self.entry_step.copy(), self.step_index,
        )


def assign_classes(cfg: SimConfig, n: int, rng):
    """Exact-count class assignment by seeded shuffle.

    round(penetration * n) vehicles become transaction vehicles; within each
    of the TV and non-TV groups, round(ratio * group) carry the high VOT.
    Non-transaction vehicles keep a (high or low) VOT for bookkeeping only;
    it never influences how their conflicts are resolved.
    """
    n_tv = int(round(cfg.tv_penetration * n))
    is_tv = np.zeros(n, dtype=bool)
    is_tv[rng.permutation(n)[:n_tv]] = True

    klass = np.full(n, KLASS_NTV, dtype=np.int64)
    high = np.zeros(n, dtype=bool)
    for group in (np.flatnonzero(is_tv), np.flatnonzero(~is_tv)):
        n_high = int(round(cfg.high_low_ratio * group.size))
        high[rng.permutation(group)[:n_high]] = True
    klass[is_tv & high] = KLASS_TV_HIGH
    klass[is_tv & ~high] = KLASS_TV_LOW

    cvot_true = np.where(high, cfg.cvot_high_s, cfg.cvot_low_s)
    cvot_decl = declared_cvot(cfg, klass, cvot_true)
    return klass, cvot_true, cvot_decl


def declared_cvot(cfg: SimConfig, klass, cvot_true) -> np.ndarray:
    cvot_decl = np.asarray(cvot_true, dtype=np.float64).copy()
    if cfg.untruthful_mode == "high_declares_low":
        cvot_decl[klass == KLASS_TV_HIGH] = cfg.cvot_low_s
    elif cfg.untruthful_mode == "low_declares_high":
        cvot_decl[klass == KLASS_TV_LOW] = cfg.cvot_high_s
    return cvot_decl


def populate_ring(cfg: SimConfig, n_vehicles: int, initial_speed: int = 0) -> Lattice:
    """Place n_vehicles uniformly at random on the ring, split across lanes."""
    if not cfg.ring:
        raise SimError("populate_ring needs a ring boundary")
    if n_vehicles > 2 * cfg.n_cells:
        raise SimError("more vehicles than cells")
    rng = placement_rng(cfg.seed)
    per_lane = (n_vehicles // 2 + n_vehicles % 2, n_vehicles // 2)
    pos_list, lane_list = [], []
    for ln in (0, 1):
        cells = np.sort(rng.choice(cfg.n_cells, size=per_lane[ln], replace=False))
        pos_list.append(cells)
        lane_list.append(np.full(per_lane[ln], ln, dtype=np.int64))
    pos = np.concatenate(pos_list).astype(np.int64)
    lane = np.concatenate(lane_list)
    klass, cvot_true, cvot_decl = assign_classes(cfg, n_vehicles, rng)
    return Lattice(
        cfg.n_cells,
        ids=np.arange(n_vehicles, dtype=np.int64),
        pos=pos, lane=lane,
        v=np.full(n_vehicles, int(initial_speed), dtype=np.int64),
        klass=klass, cvot_true=cvot_true, cvot_decl=cvot_decl,
        entry_step=np.zeros(n_vehicles, dtype=np.int64),
    )


def vehicles_for_density(cfg: SimConfig, density: float) -> int:
    """Exact vehicle count for a per-lane density in veh/km."""
    return int(round(density * cfg.road_km * cfg.n_lanes))


# ---------------------------------------------------------------------------
# reference engine (plain Python, built on the public game solvers)


def _dist_ahead(occ_lane, cell, start, n_cells, ring, wrap_to_self):
    """Distance to the nearest occupied cell at offsets >= start (0 = side).

    With nothing ahead, a ring scan of the subject lane wraps back to the
    probe vehicle itself at distance n_cells (wrap_to_self); other scans
    report FAR.
    """
    if start == 0 and occ_lane[cell] >= 0:
        return 0
    limit = n_cells - 1 if ring else n_cells - 1 - cell
    for d in range(max(start, 1), limit + 1):
        c = cell + d
        if ring:
            c %= n_cells
        if occ_lane[c] >= 0:
            return d
    return n_cells if (ring and wrap_to_self) else FAR


def _dist_behind(occ_lane, cell, n_cells, ring):
    limit = n_cells - 1 if ring else cell
    for d in range(1, limit + 1):
        c = cell - d
        if ring:
            c %= n_cells
        if occ_lane[c] >= 0:
            return d, occ_lane[c]
    return FAR, -1


def candidate_speeds(lat: Lattice, index: int, cfg: SimConfig):
    """Pre-randomization candidate speeds of one vehicle.

    Returns (v_stay, v_change, d_s, d_t): the acceleration step followed by
    the half-gap caps against the nearest leader in the subject lane (d_s)
    and the target lane (d_t, where a side-by-side vehicle counts with
    distance 0).  Absent leaders are reported as math.inf; on a ring a lone
    vehicle wraps around to itself at distance n_cells.
    """
    occ = np.full((2, lat.n_cells), -1, dtype=np.int64)
    occ[lat.lane, lat.pos] = np.arange(lat.n)
    cell = int(lat.pos[index])
    ln = int(lat.lane[index])
    occ[ln, cell] = -1  # own slot is not a leader
    d_s = _dist_ahead(occ[ln], cell, 1, lat.n_cells, cfg.ring, wrap_to_self=True)
    d_t = _dist_ahead(occ[1 - ln], cell, 0, lat.n_cells, cfg.ring, wrap_to_self=False)
    vi = min(int(lat.v[index]) + 1, cfg.v_max)
    v_stay = min(vi, d_s // 2)
    v_change = min(vi, v_stay + 1, d_t // 2)
    ds_out = math.inf if d_s >= FAR else d_s
    dt_out = math.inf if d_t >= FAR else d_t
    return v_stay, v_change, ds_out, dt_out


def compute_candidates(lat: Lattice, cfg: SimConfig, step: int):
    """Candidates for every vehicle, with the shared slowdown draw applied."""
    v_stay = np.empty(lat.n, dtype=np.int64)
    v_change = np.empty(lat.n, dtype=np.int64)
    for i in range(lat.n):
        vs, vc, _, _ = candidate_speeds(lat, i, cfg)
        if uniform01(cfg.seed, int(lat.ids[i]), step, TAG_SLOWDOWN) < cfg.p_sd:
            vs = max(0, vs - 1)
            vc = max(0, vc - 1)
        v_stay[i] = vs
        v_change[i] = vc
    return v_stay, v_change


def _time_gain_seconds(v1_cells, v2_cells, ve_ms, cfg: SimConfig) -> float:
    """Time difference for a candidate pair, with rates signed toward ve."""
    v1 = v1_cells * cfg.cells_to_ms
    v2 = v2_cells * cfg.cells_to_ms
    a1 = cfg.a_neg_ms if v1 >= ve_ms else cfg.a_pos_ms
    a2 = cfg.a_pos_ms if v2 <= ve_ms else cfg.a_neg_ms
    s = games.SpeedScenario(v1=v1, v2=v2, ve=ve_ms, ta=cfg.ta, a1=a1, a2=a2)
    return games.time_difference(s)


def resolve_lane_changes(lat: Lattice, cfg: SimConfig, v_stay, v_change,
                         ve_by_class, step: int):
    """Walk vehicles downstream-most first and settle every lane change.

    A vehicle whose capped change candidate beats its stay candidate either
    slips into a free gap or plays one game against the nearest lag vehicle
    in the target lane whose give-way cap would bind.  Each vehicle settles
    at most once per step; later pairings that touch an already settled
    vehicle are dropped (the initiator stays put).  Lane flips are visible
    to every later decision.  Mutates lat.lane, returns (final_v, records,
    n_free_changes).
    """
    n = lat.n
    occ = np.full((2, lat.n_cells), -1, dtype=np.int64)
    occ[lat.lane, lat.pos] = np.arange(n)
    final_v = v_stay.astype(np.int64).copy()
    committed = np.zeros(n, dtype=bool)
    records = []
    free_changes = 0

    order = sorted(range(n), key=lambda i: (-lat.pos[i], lat.lane[i]))
    for i in order:
        if committed[i]:
            continue
        vs = int(v_stay[i])
        vc = int(v_change[i])
        if vc <= vs:
            continue
        cell = int(lat.pos[i])
        target = 1 - int(lat.lane[i])
        d_t = _dist_ahead(occ[target], cell, 0, lat.n_cells, cfg.ring,
                          wrap_to_self=False)
        vc = min(vc, d_t // 2)
        if vc <= vs:
            continue

        d_ab, j = _dist_behind(occ[target], cell, lat.n_cells, cfg.ring)
        cap_b = d_ab // 2
        if j >= 0:
            speed_b = int(final_v[j]) if committed[j] else int(v_stay[j])
        else:
            speed_b = 0
        if j < 0 or speed_b <= cap_b:
            # free gap: the lag vehicle (if any) is unconstrained by the merge
            occ[lat.lane[i], cell] = -1
            lat.lane[i] = target
            occ[target, cell] = i
            final_v[i] = vc
            committed[i] = True
            free_changes += 1
            continue
        if committed[j]:
            # the blocking lag vehicle already settled this step
            continue

        td_a = _time_gain_seconds(vc, vs, ve_by_class[lat.klass[i]], cfg)
        v1b = int(v_stay[j])
        v2b = min(v1b, cap_b)
        td_b = _time_gain_seconds(v1b, v2b, ve_by_class[lat.klass[j]], cfg)
        game = games.build_utility_matrix(
            float(lat.cvot_decl[i]), td_a, float(lat.cvot_decl[j]), td_b
        )
        both_tv = lat.klass[i] != KLASS_NTV and lat.klass[j] != KLASS_NTV
        if both_tv:
            out = games.solve_tu(game)
            action, sigma, kind = out.action, out.sigma, KIND_TU
        else:
            coin = KeyedCoin(cfg.seed, int(lat.ids[i]), step, TAG_COIN)
            out = games.solve_ntu(game, coin)
            action, sigma, kind = out.realized_action, 0.0, KIND_NTU

        if action == (1, 2):
            occ[lat.lane[i], cell] = -1
            lat.lane[i] = target
            occ[target, cell] = i
            final_v[i] = vc
            final_v[j] = v2b
        else:
            final_v[i] = vs
            final_v[j] = v1b
        committed[i] = True
        committed[j] = True
        records.append((
            float(step), float(lat.ids[i]), float(lat.ids[j]), float(kind),
            float(action[0]), float(action[1]), float(sigma),
            td_a, td_b,
            td_a if action == (1, 2) else 0.0,
            td_b if action == (2, 1) else 0.0,
            float(lat.cvot_decl[i]), float(lat.cvot_decl[j]),
            float(lat.cvot_true[i]), float(lat.cvot_true[j]),
        ))

    chunk = np.array(records, dtype=np.float64).reshape(len(records), REC_WIDTH)
    return final_v, chunk, free_changes


def python_step(lat: Lattice, cfg: SimConfig, ve_by_class, step: int):
    """One full update with the reference engine; mutates lat in place.

    In open mode positions are left unwrapped (callers retire vehicles that
    ran off the grid); on a ring they wrap.  Returns (records, free_changes).
    """
    v_stay, v_change = compute_candidates(lat, cfg, step)
    final_v, chunk, free_changes = resolve_lane_changes(
        lat, cfg, v_stay, v_change, ve_by_class, step
    )
    lat.v = final_v
    lat.pos = lat.pos + final_v
    if cfg.ring:
        lat.pos %= lat.n_cells
    lat.step_index = step + 1
    return chunk, free_changes


# ---------------------------------------------------------------------------
# simulation driver


class Simulation:
    """Owns one lattice, advances it step by step and keeps the books.

    engine "numba" runs the compiled kernel, "python" the reference
    implementation; both produce bit-identical trajectories and ledgers.
    """

    def __init__(self, cfg: SimConfig, lattice: Lattice | None = None, *,
                 n_vehicles: int | None = None, density: float | None = None,
                 warmup: int = 0, keep_records: bool = True,
                 record_snapshots: bool = False, engine: str = "numba"):
        if engine not in ("numba", "python"):
            raise SimError(f"unknown engine {engine!r}")
        self.cfg = cfg
        if lattice is None:
            if density is not None:
                n_vehicles = vehicles_for_density(cfg, density)
            if n_vehicles is None:
                raise SimError("need a lattice, n_vehicles or density")
            lattice = populate_ring(cfg, n_vehicles)
        self.lat = lattice
        self.engine = engine
        self.warmup = int(warmup)
        self.record_snapshots = record_snapshots
        self.snapshots = [] if record_snapshots else None
        self.ledger = GameLedger(warmup=warmup, keep_records=keep_records)
        self.ledger.register_vehicles(
            lattice.ids, lattice.klass, lattice.cvot_true, lattice.entry_step
        )
        self._next_id = int(lattice.ids.max()) + 1 if lattice.n else 0
        self.free_changes = 0
        self.spill = 0
        # row 0 holds the initial state; row t+1 the state after step t
        self._mean_rows = [self._class_row()]
        self._count_rows = [self._class_counts()]
        self._kernel = None
        self._rec_buf = None
        if engine == "numba":
            from . import _kernel

            self._kernel = _kernel

    def _class_counts(self):
        counts = np.bincount(self.lat.klass, minlength=3) if self.lat.n else np.zeros(3, dtype=np.int64)
        return np.append(counts, self.lat.n)

    def _class_row(self):
        row = np.full(4, np.nan)
        if self.lat.n == 0:
            return row
        sums = np.bincount(self.lat.klass, weights=self.lat.v, minlength=3)
        counts = np.bincount(self.lat.klass, minlength=3)
        for k in range(3):
            if counts[k]:
                row[k] = sums[k] / counts[k]
        row[3] = self.lat.v.mean()
        return row

    def equilibrium_speeds(self) -> np.ndarray:
        """Per-class equilibrium speed in m/s from the trailing window.

        Mean of the recorded per-step class means over the last ve_window
        rows; classes currently below SPARSE_CLASS vehicles borrow the
        all-vehicle mean, and everything is floored at VE_FLOOR.
        """
        window = np.array(self._mean_rows[-self.cfg.ve_window:])
        counts_now = self._class_counts()
        valid = ~np.isnan(window)
        n_valid = valid.sum(axis=0)
        sums = np.where(valid, window, 0.0).sum(axis=0)
        col_means = np.where(n_valid > 0, sums / np.maximum(n_valid, 1), np.nan)
        all_mean = col_means[3]
        ve = np.empty(3)
        for k in range(3):
            mean_k = col_means[k]
            if counts_now[k] < SPARSE_CLASS or math.isnan(mean_k):
                mean_k = all_mean
            if math.isnan(mean_k):
                mean_k = 0.0
            ve[k] = max(mean_k * self.cfg.cells_to_ms, VE_FLOOR)
        return ve

    def step(self):
        cfg = self.cfg
        lat = self.lat
        t = lat.step_index
        ve3 = self.equilibrium_speeds()
        if self.engine == "python":
            chunk, free = python_step(lat, cfg, ve3, t)
        else:
            if self._rec_buf is None or self._rec_buf.shape[0] < max(lat.n, 1):
                self._rec_buf = np.empty((max(lat.n, 1), REC_WIDTH))
            chunk, free = self._kernel.kernel_step(lat, cfg, ve3, t, self._rec_buf)
        self.free_changes += free
        self.ledger.add_chunk(chunk)
        if t >= self.warmup:
            self.ledger.add_distance(lat.ids, lat.v)

        if not cfg.ring:
            gone = lat.pos >= cfg.n_cells
            if gone.any():
                self.ledger.retire_vehicles(lat.ids[gone], t + 1)
                lat.keep(~gone)
            self._inject(t)

        self._mean_rows.append(self._class_row())
        self._count_rows.append(self._class_counts())
        if self.record_snapshots:
            self.snapshots.append((lat.pos.copy(), lat.lane.copy(), lat.v.copy()))
        self.ledger.end_step = lat.step_index
        return chunk

    def _inject(self, t: int):
        cfg = self.cfg
        for ln in (0, 1):
            if uniform01(cfg.seed, ln, t, TAG_INJECT) >= cfg.inflow_rate:
                continue
            taken = np.any((self.lat.pos == 0) & (self.lat.lane == ln))
            if taken:
                self.spill += 1
                continue
            vid = self._next_id
            self._next_id += 1
            tv = uniform01(cfg.seed, vid, 0, TAG_CLASS_TV) < cfg.tv_penetration
            high = uniform01(cfg.seed, vid, 0, TAG_CLASS_HIGH) < cfg.high_low_ratio
            klass = (KLASS_TV_HIGH if high else KLASS_TV_LOW) if tv else KLASS_NTV
            cvot_true = cfg.cvot_high_s if high else cfg.cvot_low_s
            cvot_decl = declared_cvot(cfg, np.array([klass]), np.array([cvot_true]))[0]
            self.lat.append(
                ids=[vid], pos=[0], lane=[ln], v=[cfg.v_max], klass=[klass],
                cvot_true=[cvot_true], cvot_decl=[cvot_decl],
                entry_step=[t + 1],
            )
            self.ledger.register_vehicles(
                [vid], [klass], [cvot_true], [t + 1]
            )

    def run(self, n_steps: int):
        for _ in range(n_steps):
            self.step()
        return self

    def history(self) -> RunHistory:
        return RunHistory(
            n_cells=self.cfg.n_cells,
            cell_length=self.cfg.cell_length,
            dt=self.cfg.dt,
            n_lanes=self.cfg.n_lanes,
            v_max=self.cfg.v_max,
            warmup=self.warmup,
            steps=self.lat.step_index,
            class_mean=np.array(self._mean_rows),
            class_count=np.array(self._count_rows),
            snapshots=self.snapshots,
        )
