"""
Report frames and rendering for the hbsa commands
"""

import json
from dataclasses import dataclass, field

import pandas as pd
from jinja2 import StrictUndefined, Template

import hbsa
import qnd
from hbsa import HyperBellLabel, MeasurementRecord, Table2Group
from qnd import Step1Record
from spbsa import DetectorMap

VERIFY_COLUMNS = ["label", "shift1", "shift2", "detections", "classified", "passed"]
CLASSIFY_COLUMNS = [
    "branch",
    "shift1",
    "shift2",
    "original",
    "relabeled",
    "detections",
    "probability",
    "classified",
]
TELEPORT_COLUMNS = ["seed", "branch", "label", "probability", "fidelity", "uncorrected_fidelity"]
SWAP_COLUMNS = ["branch", "charlie_label", "ab_label", "probability", "match"]
TABLE_COLUMNS = ["table", "key", "transcribed", "simulated", "match"]

# Keeps floating-point noise below the last printed digit out of the reports
DIGITS = 12

TEXT_TEMPLATE = """\
{{ command }} (seed {{ seed }})

{{ rows }}

{% for key, value in summary.items() -%}
{{ key }}: {{ value }}
{% endfor -%}
{% for title, frame in sections.items() %}
{{ title }}
{{ frame }}
{% endfor -%}
"""


@dataclass
class Report:
    command: str
    seed: int
    rows: pd.DataFrame
    summary: dict = field(default_factory=dict)
    sections: dict[str, pd.DataFrame] = field(default_factory=dict)


def _frame(rows: list[dict], columns: list[str]) -> pd.DataFrame:
    return pd.DataFrame(rows, columns=columns)


def verify_row(label: HyperBellLabel, records: list[MeasurementRecord], classified: str) -> dict:
    """
    One row of the verification sweep

    Args:
        label: Prepared state
        records: Measurement records of every branch
        classified: Label returned by the classifier, or the error name

    Returns:
        Row dictionary in VERIFY_COLUMNS order
    """
    step1 = records[0].step1
    return {
        "label": str(label),
        "shift1": str(step1.shift1),
        "shift2": str(step1.shift2),
        "detections": " ".join(sorted({r.detection for r in records})),
        "classified": classified,
        "passed": classified == str(label),
    }


def failed_row(label: HyperBellLabel, error: Exception) -> dict:
    return {
        "label": str(label),
        "shift1": "-",
        "shift2": "-",
        "detections": "-",
        "classified": type(error).__name__,
        "passed": False,
    }


def verify_frame(rows: list[dict]) -> pd.DataFrame:
    return _frame(rows, VERIFY_COLUMNS)


def classify_frame(branches) -> pd.DataFrame:
    """Measurement branches of one classification, with the decoded label"""
    rows = [
        {
            "branch": i,
            "shift1": str(b.outcome.step1.shift1),
            "shift2": str(b.outcome.step1.shift2),
            "original": str(b.outcome.step1.original),
            "relabeled": str(b.outcome.step1.relabeled),
            "detections": b.outcome.detection,
            "probability": round(b.probability, DIGITS),
            "classified": classified,
        }
        for i, (b, classified) in enumerate(branches)
    ]
    return _frame(rows, CLASSIFY_COLUMNS)


def teleport_frame(trials) -> pd.DataFrame:
    """
    Rows of a teleportation run

    Args:
        trials: (seed, branches) per trial

    Returns:
        One row per branch of every trial
    """
    rows = [
        {
            "seed": seed,
            "branch": i,
            "label": str(b.label),
            "probability": round(b.probability, DIGITS),
            "fidelity": round(b.fidelity, DIGITS),
            "uncorrected_fidelity": round(b.uncorrected_fidelity, DIGITS),
        }
        for seed, branches in trials
        for i, b in enumerate(branches)
    ]
    return _frame(rows, TELEPORT_COLUMNS)


def swap_frame(branches) -> pd.DataFrame:
    rows = [
        {
            "branch": i,
            "charlie_label": str(b.charlie_label),
            "ab_label": str(b.ab_label),
            "probability": round(b.probability, DIGITS),
            "match": b.match,
        }
        for i, b in enumerate(branches)
    ]
    return _frame(rows, SWAP_COLUMNS)


def _table1_text(record: Step1Record | None) -> str:
    if record is None:
        return "-"
    return f"{record.shift1} {record.shift2} -> {record.relabeled}"


def _support_text(group: Table2Group | None) -> str:
    if group is None:
        return "-"
    return " ".join(sorted(f"{a}/{b}" for a, b in group.detections))


def table_frame(derived1: list[Step1Record], derived2: list[Table2Group]) -> pd.DataFrame:
    """
    Side-by-side transcription and simulation of both tables

    Table I has one row per original polarization state, Table II one row per
    (new polarization, time-bin) product.

    Args:
        derived1: Simulated Table I rows
        derived2: Simulated Table II groups

    Returns:
        20 rows in TABLE_COLUMNS order
    """
    rows = []
    simulated1 = {r.original: r for r in derived1}
    for original, s1, s2, new in qnd.TABLE_I:
        transcribed = _table1_text(Step1Record(s1, s2, original, new))
        simulated = _table1_text(simulated1.get(original))
        rows.append(
            {
                "table": "I",
                "key": str(original),
                "transcribed": transcribed,
                "simulated": simulated,
                "match": transcribed == simulated,
            }
        )

    for group in hbsa.TABLE_II:
        for pol, tb in group.members:
            derived = next((g for g in derived2 if (pol, tb) in g.members), None)
            transcribed = f"G{group.group_id} {_support_text(group)}"
            simulated = f"G{group.group_id} {_support_text(derived)}"
            rows.append(
                {
                    "table": "II",
                    "key": f"{pol} {tb}",
                    "transcribed": transcribed,
                    "simulated": simulated,
                    "match": transcribed == simulated,
                }
            )
    return _frame(rows, TABLE_COLUMNS)


def detector_map_frame(detector_map: DetectorMap) -> pd.DataFrame:
    rows = [
        {"detector": name, "port": str(port), "bell": str(bell)}
        for name, port, bell in detector_map.rows()
    ]
    return pd.DataFrame(rows, columns=["detector", "port", "bell"])


def _json_default(value):
    # numpy scalars that pandas leaves in object columns
    return value.item() if hasattr(value, "item") else str(value)


def _to_json(report: Report) -> str:
    document = {
        "command": report.command,
        "seed": report.seed,
        "rows": report.rows.to_dict(orient="records"),
        "summary": report.summary,
    }
    return json.dumps(document, indent=2, ensure_ascii=False, default=_json_default) + "\n"


def render(report: Report, fmt: str) -> str:
    """
    Render a report as text, csv or json

    Args:
        report: Report to render
        fmt: Output format

    Returns:
        The rendered document, ending with a newline
    """
    if fmt == "json":
        return _to_json(report)
    if fmt == "csv":
        return report.rows.to_csv(index=False, lineterminator="\n")
    if fmt == "text":
        template = Template(TEXT_TEMPLATE, undefined=StrictUndefined, keep_trailing_newline=True)
        return template.render(
            command=report.command,
            seed=report.seed,
            rows=report.rows.to_string(index=False),
            summary=report.summary,
            sections={t: f.to_string(index=False) for t, f in report.sections.items()},
        )
    raise ValueError(f"Unknown report format: {fmt}")
