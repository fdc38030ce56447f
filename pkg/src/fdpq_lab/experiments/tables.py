"""Text and CSV dumps of the quantisation tables and perceptual weight maps."""

from __future__ import annotations

import io
from pathlib import Path
from typing import Optional

import pandas as pd

from fdpq_lab.quantisation.fdpq import modified_mf_table, modified_sf_table, weight_curve, weight_map
from fdpq_lab.quantisation.quant import MF_TABLE, SF_TABLE, mf_closed_form, qstep_from_qp, sf_closed_form

DUMP_MAP_SIZES: tuple[int, ...] = (4, 8)
EXAMPLE_QP = 22


def quant_table_lines() -> list[str]:
    lines = ["QP QStep MF SF", *(f"{qp} {qstep_from_qp(qp):.4f} {MF_TABLE[qp]} {SF_TABLE[qp]}" for qp in range(6))]
    lines.append("")
    lines.append("QP MF_closed SF_closed MF*SF/2^20")
    for qp in range(6):
        lines.append(
            f"{qp} {mf_closed_form(qp):.1f} {sf_closed_form(qp):.3f} {MF_TABLE[qp] * SF_TABLE[qp] / 2**20:.6f}"
        )
    return lines


def weight_map_lines(size: int) -> list[str]:
    wm = weight_map(size)
    lines = [f"Weight map {size}x{size} (rows y, columns x)"]
    for y in range(size):
        cells = [f"d={wm.d[y, x]:.4f} w={wm.w[y, x]:.4f}" for x in range(size)]
        lines.append(" | ".join(cells))
    return lines


def modified_table_lines(qp: int, size: int) -> list[str]:
    mf = modified_mf_table(qp % 6, size)
    sf = modified_sf_table(qp % 6, size)
    lines = [f"Modified MF / SF at QP {qp}, {size}x{size}"]
    for y in range(size):
        lines.append(" ".join(f"{int(mf[y, x])}/{int(sf[y, x])}" for x in range(size)))
    return lines


def dump_tables(sizes: tuple[int, ...] = DUMP_MAP_SIZES) -> str:
    """MF/SF tables, closed-form checks and weight maps at four decimals."""

    lines = quant_table_lines()
    for size in sizes:
        lines.append("")
        lines.extend(weight_map_lines(size))
    lines.append("")
    lines.extend(modified_table_lines(EXAMPLE_QP, sizes[0]))
    return "\n".join(lines) + "\n"


def weight_frame(size: int) -> pd.DataFrame:
    wm = weight_map(size)
    records = [
        {"x": x, "y": y, "d": float(wm.d[y, x]), "w": float(wm.w[y, x])}
        for y in range(size)
        for x in range(size)
    ]
    return pd.DataFrame(records, columns=["x", "y", "d", "w"])


def curve_frame(samples: int = 101) -> pd.DataFrame:
    d, w = weight_curve(samples)
    return pd.DataFrame({"d": d, "w": w})


def dump_weights(size: int, *, curve: bool = False, samples: int = 101, path: Optional[str | Path] = None) -> str:
    """CSV of one weight map (or of the decay curve); written to ``path`` when given."""

    frame = curve_frame(samples) if curve else weight_frame(size)
    buffer = io.StringIO()
    frame.to_csv(buffer, index=False, float_format="%.4f", lineterminator="\n")
    text = buffer.getvalue()
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text
