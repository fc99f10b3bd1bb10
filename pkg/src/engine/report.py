from __future__ import annotations
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import pandas as pd

from src.device.latency import DeviceModel
from src.engine.metrics import Metrics
from src.engine.simulate import ModelRegistry, simulate
from src.oracle.belady import belady_replay
from src.traces.trace import Trace

logger = logging.getLogger(__name__)


def improvement_metric(rcrnn_cached: float, rcrnn_dur: float, base_cached: float, base_dur: float) -> int:
    """Percent gain of the joint (cached x duration) accuracy over a baseline, rounded half up."""
    for v in (rcrnn_cached, rcrnn_dur, base_cached, base_dur):
        if not 0.0 <= v <= 1.0:
            raise ValueError("accuracies must be fractions in [0, 1]")
    denom = base_cached * base_dur
    if denom == 0:
        raise ZeroDivisionError("baseline accuracy product is zero")
    return int(math.floor(100.0 * ((rcrnn_cached * rcrnn_dur) / denom - 1.0) + 0.5))


@dataclass
class SimulationReport:
    metrics: Dict[str, Metrics]
    config: Dict[str, object] = field(default_factory=dict)
    belady_hit_ratio: float = float("nan")

    def normalized_hit_ratio(self, policy: str) -> float:
        if not self.belady_hit_ratio or math.isnan(self.belady_hit_ratio):
            return float("nan")
        return self.metrics[policy].hit_ratio / self.belady_hit_ratio

    def table(self) -> pd.DataFrame:
        rows = []
        for name, m in self.metrics.items():
            row = m.as_row()
            row["normalized_hit_ratio"] = self.normalized_hit_ratio(name)
            rows.append(row)
        return pd.DataFrame(rows)

    def long(self) -> pd.DataFrame:
        """One row per (policy, metric)."""
        return self.table().melt(id_vars="policy", var_name="metric", value_name="value")

    def window_series(self) -> pd.DataFrame:
        frames = [
            pd.DataFrame({"policy": name, "window": range(len(m.window_hit_ratios)),
                          "hit_ratio": m.window_hit_ratios})
            for name, m in self.metrics.items()
        ]
        return pd.concat(frames, ignore_index=True)

    def write(self, out_dir: Path | str, window_series: bool = True) -> List[Path]:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        written = [out_dir / "summary.csv", out_dir / "metrics_long.csv", out_dir / "report.json"]
        self.table().to_csv(written[0], index=False, float_format="%.6f")
        self.long().to_csv(written[1], index=False)
        payload = {"config": self.config, "belady_hit_ratio": self.belady_hit_ratio,
                   "policies": self.table().to_dict(orient="records")}
        written[2].write_text(json.dumps(payload, indent=2, default=str, sort_keys=True) + "\n")
        if window_series:
            written.append(out_dir / "window_series.csv")
            self.window_series().to_csv(written[-1], index=False, float_format="%.6f")
        return written


def compare_report(
    trace: Trace,
    capacity: int,
    policies: Sequence[str],
    models: Optional[ModelRegistry] = None,
    device: DeviceModel = DeviceModel(),
    config: Optional[Dict[str, object]] = None,
    **sim_kwargs,
) -> SimulationReport:
    """Run every policy on the same trace; hit ratios are also reported relative to belady."""
    results: Dict[str, Metrics] = {}
    for name in policies:
        results[name] = simulate(trace, name, capacity, device=device, models=models, **sim_kwargs)
        logger.info("%s done: hit ratio %.4f", name, results[name].hit_ratio)
    ref = results["belady"] if "belady" in results else belady_replay(trace, capacity)
    echo = {"capacity_pages": capacity, "requests": len(trace), "policies": list(policies)}
    echo.update(config or {})
    return SimulationReport(results, echo, ref.hit_ratio)
