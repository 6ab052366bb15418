"""Color handling: colors live in columns as packed 32-bit RGBA integers."""
from __future__ import annotations

import numpy as np

DEFAULT_COLOR = "#808080ff"
DEFAULT_HIGHLIGHT = "#ffff00ff"


def pack(color: str | int) -> int:
    """Parse "#rrggbb" / "#rrggbbaa" (or an already-packed int) to 0xRRGGBBAA."""
    if isinstance(color, (int, np.integer)):
        value = int(color)
        if not 0 <= value <= 0xFFFFFFFF:
            raise ValueError(f"packed color out of range: {value:#x}")
        return value
    s = color.strip().lower()
    if not s.startswith("#") or len(s) not in (7, 9):
        raise ValueError(f"expected #rrggbb or #rrggbbaa, got {color!r}")
    digits = s[1:]
    if len(digits) == 6:
        digits += "ff"
    try:
        return int(digits, 16)
    except ValueError:
        raise ValueError(f"bad color literal {color!r}") from None


def unpack(value: int) -> str:
    return f"#{int(value) & 0xFFFFFFFF:08x}"


def pack_array(colors) -> np.ndarray:
    arr = np.asarray(colors)
    if arr.dtype.kind in "ui":
        return arr.astype(np.uint32)
    return np.array([pack(c) for c in arr.tolist()], dtype=np.uint32)


def unpack_array(values: np.ndarray) -> list[str]:
    return [unpack(v) for v in values.tolist()]
