"""Per-buffer-cycle metrics CSV."""

from __future__ import annotations

import csv
import math
import os
from dataclasses import asdict, dataclass, fields

HEADER = ("algo,scenario,seed,env_step,episodes,mean_ru,mean_rd,mean_rg,mean_iterations,"
          "retrans_pct,max_ul_rate_gbps,energy_j,total_delay_ms,wall_clock_ms")


@dataclass
class MetricsRow:
    algo: str
    scenario: str
    seed: int
    env_step: int
    episodes: int
    mean_ru: float
    mean_rd: float
    mean_rg: float
    mean_iterations: float
    retrans_pct: float
    max_ul_rate_gbps: float
    energy_j: float
    total_delay_ms: float
    wall_clock_ms: float = 0.0

    def cells(self) -> list[str]:
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, float):
                if not math.isfinite(v):
                    raise ValueError(f"metrics field {f.name} is not finite: {v}")
                out.append("%.6g" % v)
            else:
                out.append(str(v))
        return out


COLUMNS = tuple(f.name for f in fields(MetricsRow))
assert ",".join(COLUMNS) == HEADER


def row_from_cycle(algo: str, scenario: str, seed: int, stats, record_wall_clock=False) -> MetricsRow:
    kpis = stats.kpis

    def mean(key):
        return sum(k[key] for k in kpis) / len(kpis) if kpis else 0.0

    return MetricsRow(algo, scenario, seed, stats.env_step, stats.episodes,
                      stats.mean_ru, stats.mean_rd, stats.mean_rg, mean("iterations"),
                      mean("retrans_pct"), mean("max_ul_rate_gbps"), mean("energy_j"),
                      mean("total_delay_ms"), stats.wall_clock_ms if record_wall_clock else 0.0)


class MetricsWriter:
    """Streams rows to ``path``; with ``append`` the file is continued, not replaced."""

    def __init__(self, path: str, append: bool = False):
        self.path = path
        self.last_step = -1
        try:
            if append and os.path.exists(path) and os.path.getsize(path) > 0:
                existing = read_metrics(path)
                if existing:
                    self.last_step = existing[-1].env_step
                self._fh = open(path, "a", newline="", encoding="utf-8")
            else:
                self._fh = open(path, "w", newline="", encoding="utf-8")
                self._fh.write(HEADER + "\n")
                self._fh.flush()
        except OSError as exc:
            raise OSError(f"cannot open metrics file {path}: {exc.strerror}") from exc
        self._csv = csv.writer(self._fh, lineterminator="\n")

    def write(self, row: MetricsRow) -> None:
        if row.env_step <= self.last_step:
            raise ValueError(f"env_step {row.env_step} does not advance past {self.last_step} in {self.path}")
        try:
            self._csv.writerow(row.cells())
            self._fh.flush()
        except OSError as exc:
            raise OSError(f"cannot write metrics file {self.path}: {exc.strerror}") from exc
        self.last_step = row.env_step

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def write_metrics(path: str, rows, append: bool = False) -> None:
    with MetricsWriter(path, append) as w:
        for row in rows:
            w.write(row)


def read_metrics(path: str) -> list[MetricsRow]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or ",".join(header) != HEADER:
            raise ValueError(f"{path}: unexpected metrics header")
        rows = []
        for cells in reader:
            kw = {}
            for f, cell in zip(fields(MetricsRow), cells):
                kw[f.name] = int(cell) if f.type in ("int", int) else float(cell) if f.type in ("float", float) else cell
            rows.append(MetricsRow(**kw))
        return rows


def as_dict(row: MetricsRow) -> dict:
    return asdict(row)
