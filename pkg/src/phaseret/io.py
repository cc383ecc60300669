"""File formats: signal JSON/CSV, measurement JSON, atomic writes.

Signal JSON: {"n": N, "real": [...], "imag": [...]}.
Signal CSV: two columns re,im, no header.
Measurement JSON: {"m": M, "n": N, "b": [...], "sigma2": s, "real_signal":
bool} plus optional augmentation metadata {"delta_re", "delta_im", "gap",
"side"}.  Floats are serialized with 17 significant digits so every value
round-trips exactly.
"""

from __future__ import annotations

import json
import os
import tempfile

import numpy as np

from .measurement import AugmentationSpec
from .signals import MeasurementSet, as_signal

__all__ = ["atomic_write_text", "dump_signal", "load_signal",
           "dump_measurement", "load_measurement",
           "save_signal_file", "load_signal_file",
           "save_measurement_file", "load_measurement_file"]


def _f(x: float) -> float:
    # round-trip through a 17-significant-digit literal (exact for doubles)
    return float(f"{float(x):.17g}")


def _float_list(a) -> list[float]:
    return [_f(v) for v in np.asarray(a, dtype=float)]


def atomic_write_text(path: str, text: str) -> None:
    """Write-temp-then-rename so readers never see partial files."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dump_signal(x) -> dict:
    x = as_signal(x)
    return {"n": int(x.size), "real": _float_list(x.real),
            "imag": _float_list(x.imag)}


def load_signal(obj: dict) -> np.ndarray:
    try:
        n = int(obj["n"])
        real = np.asarray(obj["real"], dtype=float)
        imag = np.asarray(obj["imag"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed signal object: {exc}") from exc
    if real.size != n or imag.size != n:
        raise ValueError(f"signal length mismatch: n={n}, "
                         f"len(real)={real.size}, len(imag)={imag.size}")
    return real + 1j * imag


def dump_measurement(ms: MeasurementSet) -> dict:
    obj = {"m": ms.m, "n": ms.n, "b": _float_list(ms.b),
           "sigma2": _f(ms.sigma2), "real_signal": ms.real_signal}
    if ms.augmentation is not None:
        spec = ms.augmentation
        obj["augmentation"] = {
            "delta_re": _f(np.real(spec.delta)),
            "delta_im": _f(np.imag(spec.delta)),
            "gap": int(spec.gap),
            "side": spec.side,
            "margin_violated": bool(spec.margin_violated),
        }
    return obj


def load_measurement(obj: dict) -> MeasurementSet:
    try:
        b = np.asarray(obj["b"], dtype=float)
        n = int(obj["n"])
        sigma2 = float(obj.get("sigma2", 0.0))
        real_signal = bool(obj.get("real_signal", False))
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed measurement object: {exc}") from exc
    if "m" in obj and int(obj["m"]) != b.size:
        raise ValueError(f"measurement length mismatch: m={obj['m']}, "
                         f"len(b)={b.size}")
    aug = None
    if obj.get("augmentation") is not None:
        a = obj["augmentation"]
        aug = AugmentationSpec(
            delta=complex(float(a["delta_re"]), float(a.get("delta_im", 0.0))),
            gap=int(a.get("gap", 0)),
            side=a.get("side", "prefix"),
        )
        aug.margin_violated = bool(a.get("margin_violated", False))
    return MeasurementSet(b, n, sigma2=sigma2, real_signal=real_signal,
                          augmentation=aug)


def save_signal_file(path: str, x) -> None:
    if path.endswith(".csv"):
        x = as_signal(x)
        lines = [f"{v.real:.17g},{v.imag:.17g}" for v in x]
        atomic_write_text(path, "\n".join(lines) + "\n")
    else:
        atomic_write_text(path, json.dumps(dump_signal(x)) + "\n")


def load_signal_file(path: str) -> np.ndarray:
    with open(path) as fh:
        text = fh.read()
    if path.endswith(".csv"):
        values = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected two columns re,im")
            try:
                values.append(complex(float(parts[0]), float(parts[1])))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from exc
        return np.asarray(values, dtype=complex)
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: invalid JSON at line {exc.lineno}") from exc
    return load_signal(obj)


def save_measurement_file(path: str, ms: MeasurementSet) -> None:
    atomic_write_text(path, json.dumps(dump_measurement(ms)) + "\n")


def load_measurement_file(path: str) -> MeasurementSet:
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: invalid JSON at line {exc.lineno}") from exc
    return load_measurement(obj)
