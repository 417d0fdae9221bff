"""Render campaign summaries as delimited or markdown tables.

Tables carry the same content either way: outcome counts and rates, the
per-cluster fail-code histograms, the raw fault-signature histogram,
detection rates and exposure statistics.  The CSV flavour is long-format
(table,key,value) so it can be fed straight into a plotting tool.
"""

from __future__ import annotations

from .campaign import Summary


def format_summary_csv(summary: Summary) -> str:
    rows = ["table,key,value"]
    rows.append(f"meta,trials,{summary.trials}")
    for outcome, count in summary.outcome_counts.items():
        rows.append(f"outcome_count,{outcome},{count}")
    for outcome, rate in summary.outcome_rates.items():
        rows.append(f"outcome_rate,{outcome},{rate:.6f}")
    rows.append(f"meta,misroute_rate,{summary.misroute_rate:.6f}")
    for code, count in summary.cluster1_fails.items():
        rows.append(f"cluster1_fails,{code},{count}")
    for code, count in summary.cluster2_fails.items():
        rows.append(f"cluster2_fails,{code},{count}")
    for value, count in summary.flt_sig_hist.items():
        rows.append(f"flt_sig,{value},{count}")
    for name, count in summary.detection_counts.items():
        rows.append(f"detection_count,{name},{count}")
    for name, rate in summary.detection_rates.items():
        rows.append(f"detection_rate,{name},{rate:.6f}")
    rows.append(f"exposure_ns,mean,{summary.exposure_mean:.3f}")
    rows.append(f"exposure_ns,min,{summary.exposure_min}")
    rows.append(f"exposure_ns,max,{summary.exposure_max}")
    return "\n".join(rows) + "\n"


def format_summary_md(summary: Summary) -> str:
    lines = ["# Campaign summary", "", f"trials: {summary.trials}", ""]

    lines += ["## Outcomes", "", "| outcome | count | rate |", "|---|---|---|"]
    for outcome, count in summary.outcome_counts.items():
        lines.append(f"| {outcome} | {count} | {summary.outcome_rates[outcome]:.3f} |")
    lines += ["", f"misroute rate: {summary.misroute_rate:.3f}", ""]

    lines += [
        "## Cluster fail codes",
        "",
        "code 0 = no fail, code k = unit k-1 (lowest corrupted unit wins)",
        "",
        "| code | cluster1 | cluster2 |",
        "|---|---|---|",
    ]
    for code in sorted(set(summary.cluster1_fails) | set(summary.cluster2_fails)):
        c1 = summary.cluster1_fails.get(code, 0)
        c2 = summary.cluster2_fails.get(code, 0)
        lines.append(f"| {code} | {c1} | {c2} |")
    lines.append("")

    lines += ["## Fault signature values", "", "| flt_sig | count |", "|---|---|"]
    for value, count in summary.flt_sig_hist.items():
        lines.append(f"| {value} | {count} |")
    lines.append("")

    lines += ["## Detection", "", "| detector | detected | rate |", "|---|---|---|"]
    for name, count in summary.detection_counts.items():
        lines.append(f"| {name} | {count} | {summary.detection_rates[name]:.3f} |")
    lines.append("")

    lines += [
        "## Exposure",
        "",
        f"mean: {summary.exposure_mean:.3f} ns, min: {summary.exposure_min} ns, max: {summary.exposure_max} ns",
    ]
    return "\n".join(lines) + "\n"


def format_summary(summary: Summary, fmt: str) -> str:
    if fmt == "csv":
        return format_summary_csv(summary)
    if fmt == "md":
        return format_summary_md(summary)
    raise ValueError(f"unknown report format {fmt!r}")
