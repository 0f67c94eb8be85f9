"""Deterministic export (CSV, JSON, key=value config) and plot-script emission."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Mapping

import numpy as np

__all__ = ["ConfigError", "format_float", "csv_text", "write_csv", "to_json", "write_json",
           "read_config", "config_text", "write_config", "plot_script", "write_text"]


class ConfigError(ValueError):
    """Bad configuration; the message is a one-line reason."""


def format_float(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def write_text(path, text: str) -> Path:
    path = Path(path)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def csv_text(columns: Mapping[str, object]) -> str:
    names = list(columns)
    cols = [np.atleast_1d(np.asarray(columns[n], dtype=float)) for n in names]
    n = {c.size for c in cols}
    if len(n) != 1:
        raise ValueError(f"columns differ in length: {dict(zip(names, (c.size for c in cols)))}")
    lines = [",".join(names)]
    for row in zip(*cols):
        lines.append(",".join(format_float(v) for v in row))
    return "\n".join(lines) + "\n"


def write_csv(path, columns: Mapping[str, object]) -> Path:
    """Fixed column order (insertion order of ``columns``), 17 significant digits, LF."""
    return write_text(path, csv_text(columns))


def _plain(obj):
    if isinstance(obj, Mapping):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def _encode(obj, indent: int) -> str:
    pad, inner = " " * indent, " " * (indent + 2)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(k)}: {_encode(obj[k], indent + 2)}" for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(_encode(v, 0) for v in obj) + "]"
        return "[\n" + ",\n".join(inner + _encode(v, indent + 2) for v in obj) + "\n" + pad + "]"
    if isinstance(obj, float):
        if math.isnan(obj):
            return "NaN"
        if math.isinf(obj):
            return "Infinity" if obj > 0 else "-Infinity"
        s = format_float(obj)
        # keep floats recognisable as floats after a parse
        return s if any(c in s for c in ".en") else s + ".0"
    return json.dumps(obj)


def to_json(obj) -> str:
    """Sorted keys, two-space indent, 17-digit floats; numpy scalars and arrays become plain JSON."""
    return _encode(_plain(obj), 0) + "\n"


def write_json(path, obj) -> Path:
    return write_text(path, to_json(obj))


def read_config(path) -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment; later lines win."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from None
    out = {}
    for k, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{k}: expected key=value, got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"{path}:{k}: empty key")
        out[key.replace("-", "_")] = value
    return out


def _config_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format_float(v)
    if isinstance(v, (list, tuple)):
        return ",".join(_config_value(x) for x in v)
    return "" if v is None else str(v)


def config_text(solver: str, config: Mapping[str, object]) -> str:
    lines = [f"# effective configuration for {solver}; feed back with --config"]
    lines += [f"{k} = {_config_value(config[k])}" for k in sorted(config)]
    return "\n".join(lines) + "\n"


def write_config(path, solver: str, config: Mapping[str, object]) -> Path:
    return write_text(path, config_text(solver, config))


_PLOT_TEMPLATE = '''"""Render the figures of this run directory (needs numpy and matplotlib)."""
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

HERE = os.path.dirname(os.path.abspath(__file__))
PANELS = {panels}


def load(name):
    return np.genfromtxt(os.path.join(HERE, name), delimiter=",", names=True)


def main():
    for p in PANELS:
        data = load(p["csv"])
        fig, ax = plt.subplots(figsize=(6, 4))
        x = data[p["x"]]
        for col in p["y"]:
            y = data[col]
            if p.get("abs"):
                y = np.abs(y)
            ax.plot(x, y, label=col)
        if p.get("logx"):
            ax.set_xscale("log")
        if p.get("logy"):
            ax.set_yscale("log")
        ax.set_xlabel(p["x"])
        ax.set_title(p["title"])
        ax.legend()
        fig.tight_layout()
        fig.savefig(os.path.join(HERE, p["png"]), dpi=120)
        plt.close(fig)


if __name__ == "__main__":
    main()
'''


def plot_script(panels: list[dict]) -> str:
    """Plain-text plotting script for ``panels`` (dicts with csv, x, y, title, png and log flags)."""
    body = "[\n" + "".join(f"    {dict(sorted(p.items()))!r},\n" for p in panels) + "]"
    return _PLOT_TEMPLATE.format(panels=body)
