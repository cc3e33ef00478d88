"""Landing-rate maps over the launch-condition grid.

Batch-evaluates a trained policy over a (speed, angle) grid with a fixed
number of independent attempts per cell, tallying four-leg, two-leg and
failed landings plus body contacts. Each (cell, trial) pair gets its own
RNG stream derived from (seed, cell, trial), so the map is bit-identical
no matter how trials are distributed over worker processes.

The map exports to CSV/JSON for external plotting; the companion
policy-region export flattens trigger-time cues and outcomes from episode
records into a table.
"""

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .config import RunConfig, SweepConfig, build_env, config_from_text, config_to_text
from .env import ApproachCondition, rollout_policy
from .logs import result_to_record
from .nets import DenseNet
from .seeding import generator, sweep_stream


@dataclass(frozen=True, slots=True)
class SweepGrid:
    velocities: tuple[float, ...]
    angles_deg: tuple[float, ...]
    trials: int

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.velocities or not self.angles_deg:
            raise ValueError("grid must contain at least one cell")

    @classmethod
    def from_config(cls, sweep: SweepConfig) -> "SweepGrid":
        return cls(velocities=tuple(sweep.velocities()),
                   angles_deg=tuple(sweep.angles_deg()),
                   trials=sweep.trials)

    @property
    def n_cells(self) -> int:
        return len(self.velocities) * len(self.angles_deg)

    def cell_condition(self, cell: int) -> ApproachCondition:
        na = len(self.angles_deg)
        return ApproachCondition(v=self.velocities[cell // na],
                                 phi_deg=self.angles_deg[cell % na])


MAP_CSV_HEADER = "V,phi,trials,n_fourleg,n_twoleg,n_fail,n_bodycontact,success_rate"


@dataclass(slots=True)
class LandingRateMap:
    grid: SweepGrid
    n_fourleg: np.ndarray      # (n_v, n_phi) int
    n_twoleg: np.ndarray
    n_fail: np.ndarray
    n_bodycontact: np.ndarray

    @property
    def success_rate(self) -> np.ndarray:
        return self.n_fourleg / self.grid.trials

    def cell(self, v: float, phi_deg: float) -> tuple[int, int]:
        iv = self.grid.velocities.index(v)
        ia = self.grid.angles_deg.index(phi_deg)
        return iv, ia

    def rows(self):
        for iv, v in enumerate(self.grid.velocities):
            for ia, phi in enumerate(self.grid.angles_deg):
                yield (v, phi, self.grid.trials,
                       int(self.n_fourleg[iv, ia]), int(self.n_twoleg[iv, ia]),
                       int(self.n_fail[iv, ia]), int(self.n_bodycontact[iv, ia]),
                       float(self.success_rate[iv, ia]))

    def to_csv(self, path: str) -> None:
        with open(path, "w") as fh:
            fh.write(MAP_CSV_HEADER + "\n")
            for row in self.rows():
                fh.write(",".join(repr(v) if isinstance(v, float) else str(v)
                                  for v in row) + "\n")

    def to_json(self, path: str) -> None:
        doc = {
            "velocities": list(self.grid.velocities),
            "angles_deg": list(self.grid.angles_deg),
            "trials": self.grid.trials,
            "n_fourleg": self.n_fourleg.tolist(),
            "n_twoleg": self.n_twoleg.tolist(),
            "n_fail": self.n_fail.tolist(),
            "n_bodycontact": self.n_bodycontact.tolist(),
            "success_rate": self.success_rate.tolist(),
        }
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _run_cells(cfg_text: str, policy_params: list[np.ndarray],
               threshold: float, grid: SweepGrid, cells: list[int],
               seed: int, deterministic: bool):
    """Evaluate a set of grid cells; runs inside a worker process."""
    cfg = config_from_text(cfg_text)
    env = build_env(cfg)
    net = DenseNet.from_params(policy_params)
    out = []
    for cell in cells:
        cond = grid.cell_condition(cell)
        counts = {"fourleg": 0, "twoleg": 0, "fail": 0, "body": 0}
        records = []
        for trial in range(grid.trials):
            stream = sweep_stream(seed, cell, trial)
            rng = generator(*stream)
            _, result = rollout_policy(env, net, rng, threshold,
                                       deterministic=deterministic,
                                       condition=cond)
            n = result.outcome.n_legs
            if n == 4:
                counts["fourleg"] += 1
            elif n == 2:
                counts["twoleg"] += 1
            else:
                counts["fail"] += 1
            if result.outcome.body_contact:
                counts["body"] += 1
            records.append(result_to_record(cell * grid.trials + trial,
                                            stream, result))
        out.append((cell, counts, records))
    return out


def run_sweep(policy_params: list[np.ndarray], grid: SweepGrid,
              cfg: RunConfig, seed: int, workers: int = 1,
              deterministic: bool = False,
              ) -> tuple[LandingRateMap, list[dict]]:
    """Evaluate the policy over the grid; returns the map and all records.

    Results are independent of ``workers``; cells are simply partitioned
    over processes and merged back in cell order.
    """
    cfg_text = config_to_text(cfg)
    na = len(grid.angles_deg)
    nv = len(grid.velocities)
    shape = (nv, na)
    n_fourleg = np.zeros(shape, dtype=int)
    n_twoleg = np.zeros(shape, dtype=int)
    n_fail = np.zeros(shape, dtype=int)
    n_body = np.zeros(shape, dtype=int)

    cells = list(range(grid.n_cells))
    threshold = cfg.threshold
    if workers <= 1:
        chunks = [_run_cells(cfg_text, policy_params, threshold, grid, cells,
                             seed, deterministic)]
    else:
        parts = [cells[i::workers] for i in range(workers)]
        parts = [p for p in parts if p]
        with ProcessPoolExecutor(max_workers=len(parts)) as pool:
            futures = [pool.submit(_run_cells, cfg_text, policy_params,
                                   threshold, grid, part, seed, deterministic)
                       for part in parts]
            chunks = [f.result() for f in futures]

    all_records: dict[int, list[dict]] = {}
    for chunk in chunks:
        for cell, counts, records in chunk:
            iv, ia = cell // na, cell % na
            n_fourleg[iv, ia] = counts["fourleg"]
            n_twoleg[iv, ia] = counts["twoleg"]
            n_fail[iv, ia] = counts["fail"]
            n_body[iv, ia] = counts["body"]
            all_records[cell] = records

    records_flat = [r for cell in sorted(all_records)
                    for r in all_records[cell]]
    rate_map = LandingRateMap(grid=grid, n_fourleg=n_fourleg,
                              n_twoleg=n_twoleg, n_fail=n_fail,
                              n_bodycontact=n_body)
    return rate_map, records_flat


REGION_CSV_HEADER = "tau_trg,theta_x_trg,d_ceil_trg,my,n_legs,body_contact,v,phi_deg"


def export_policy_region(records: list[dict],
                         n_legs_filter: set[int] | None = None) -> list[tuple]:
    """Trigger-time cue table from episode records.

    One row per triggered episode: the cues the policy saw when it fired,
    the applied moment, and the outcome. Episodes that never triggered
    have no trigger-time cues and are skipped.
    """
    rows = []
    for rec in records:
        obs = rec.get("trigger_obs")
        if obs is None:
            continue
        n = rec["outcome"]["n_legs"]
        if n_legs_filter is not None and n not in n_legs_filter:
            continue
        rows.append((obs["tau"], obs["theta_x"], obs["d_ceil"], rec["my"], n,
                     rec["outcome"]["body_contact"], rec["condition"]["v"],
                     rec["condition"]["phi_deg"]))
    return rows


def write_policy_region_csv(path: str, records: list[dict],
                            n_legs_filter: set[int] | None = None) -> None:
    with open(path, "w") as fh:
        fh.write(REGION_CSV_HEADER + "\n")
        for row in export_policy_region(records, n_legs_filter):
            fh.write(",".join(repr(v) if isinstance(v, float) else str(v)
                              for v in row) + "\n")


def export_trajectories(records: list[dict], cfg: RunConfig,
                        episodes: list[int], path: str) -> int:
    """Per-step cue trajectories for selected logged episodes.

    Re-simulates each requested episode (records carry everything needed)
    and writes one combined CSV with an episode column. Returns the number
    of trace rows written.
    """
    from .logs import TRACE_HEADER, replay_record

    by_id = {r["episode"]: r for r in records}
    n = 0
    with open(path, "w") as fh:
        fh.write("episode," + TRACE_HEADER + "\n")
        for ep in episodes:
            if ep not in by_id:
                raise KeyError(f"episode {ep} not present in the records")
            _, rows = replay_record(by_id[ep], cfg, collect_trace=True)
            for row in rows:
                fh.write(f"{ep},{row}\n")
            n += len(rows)
    return n
