"""Result serialization: the fixed CSV schema and the run manifest.

The first fourteen columns form the stable schema consumed by downstream
tooling; the trailing columns make every row self-describing (seed, policy,
redraw diagnostics).  Inapplicable fields are empty strings.  Files are
written to a temporary name and renamed, so readers never observe a partial
file.
"""

import json
import math
import os
import tempfile
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone

from .experiments import ExperimentSpec, RateSummary

CSV_COLUMNS = (
    "experiment",
    "scheme",
    "n_rx",
    "n_tx",
    "n_users",
    "snr_db",
    "coherence_block",
    "feedback_bits",
    "feedback_fraction",
    "trials",
    "mean_user_rate",
    "sum_rate",
    "stderr",
    "bound_floor",
    "seed",
    "antenna_policy",
    "trials_redrawn",
)


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    return str(value)


def summary_row(experiment: str, summary: RateSummary) -> dict:
    cfg = summary.config
    return {
        "experiment": experiment,
        "scheme": summary.scheme,
        "n_rx": cfg.n_rx,
        "n_tx": cfg.n_tx,
        "n_users": cfg.n_users,
        "snr_db": 10.0 * math.log10(cfg.snr),
        "coherence_block": cfg.coherence_block,
        "feedback_bits": cfg.feedback_bits_per_block,
        "feedback_fraction": cfg.feedback_fraction,
        "trials": summary.trials_used,
        "mean_user_rate": summary.mean_user_rate,
        "sum_rate": summary.sum_rate,
        "stderr": summary.stderr,
        "bound_floor": summary.bound_overlay,
        "seed": summary.seed,
        "antenna_policy": summary.policy_label or None,
        "trials_redrawn": summary.trials_redrawn,
    }


def _atomic_write(path: str, payload: str):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: str, experiment: str, summaries: list[RateSummary]):
    """Write one comma-separated, LF-terminated results file."""
    lines = [",".join(CSV_COLUMNS)]
    for summary in summaries:
        row = summary_row(experiment, summary)
        lines.append(",".join(_cell(row[col]) for col in CSV_COLUMNS))
    _atomic_write(path, "\n".join(lines) + "\n")


@dataclass
class RunManifest:
    """Everything needed to reproduce a run exactly, written beside results."""

    tool: str
    version: str
    experiment: str
    seed: int
    created_utc: str
    specs: list[dict]
    outputs: list[str]
    skipped: list[dict] = field(default_factory=list)


def spec_dict(spec: ExperimentSpec) -> dict:
    data = asdict(spec)
    data["base"] = asdict(spec.base)
    data["sweep_values"] = list(spec.sweep_values)
    data["schemes"] = list(spec.schemes)
    return data


def build_manifest(version, experiment, seed, specs, outputs, skipped) -> RunManifest:
    return RunManifest(
        tool="fdd-mimo",
        version=version,
        experiment=experiment,
        seed=seed,
        created_utc=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        specs=[spec_dict(s) for s in specs],
        outputs=list(outputs),
        skipped=[asdict(s) for s in skipped],
    )


def write_manifest(path: str, manifest: RunManifest):
    _atomic_write(path, json.dumps(asdict(manifest), indent=2, sort_keys=True) + "\n")
