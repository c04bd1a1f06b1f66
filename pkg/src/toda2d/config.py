"""JSON point configurations and coefficient snapshots."""
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidPoint, IoError, ParseError
from .manifold import LaxPoint, LoopLaxPoint
from .spectral import DEFAULT_M, DEFAULT_N, LoopField

SNAPSHOT_FORMAT = "toda2d-snapshot/1"


@dataclass
class PointConfig:
    n_modes: int = DEFAULT_N
    x_modes: int = DEFAULT_M
    lam: list = field(default_factory=list)
    lamb: list = field(default_factory=list)
    x_modulation: list = field(default_factory=list)
    seed: int = 0
    hamiltonians: list = None
    # raw arrays when the file was a snapshot
    arrays: tuple = None

    @property
    def is_loop(self):
        return bool(self.x_modulation) or self.arrays is not None

    def point(self):
        """The x-independent point (the x = 0 sample for loop data)."""
        if self.is_loop:
            return self.loop().at_x(0.0)
        lam = {int(k): complex(re, im) for k, re, im in self.lam}
        lamb = {int(k): complex(re, im) for k, re, im in self.lamb}
        self._check_range(list(lam) + list(lamb))
        return LaxPoint.from_dicts(lam, lamb, self.n_modes)

    def loop(self):
        if self.arrays is not None:
            return LoopLaxPoint(LoopField(self.arrays[0]), LoopField(self.arrays[1]))
        lam, lamb = {}, {}
        for k, re, im in self.lam:
            lam[(0, int(k))] = lam.get((0, int(k)), 0) + complex(re, im)
        for k, re, im in self.lamb:
            lamb[(0, int(k))] = lamb.get((0, int(k)), 0) + complex(re, im)
        for entry in self.x_modulation:
            m, k, re, im = entry[:4]
            target = entry[4] if len(entry) > 4 else "lambda"
            if target not in ("lambda", "lambdabar"):
                raise ParseError(f"x_modulation target must be lambda or lambdabar, got {target!r}")
            d = lam if target == "lambda" else lamb
            d[(int(m), int(k))] = d.get((int(m), int(k)), 0) + complex(re, im)
        self._check_range([k for _, k in list(lam) + list(lamb)])
        if (0, 1) in lam:
            lam[(0, 1)] -= 1.0
        try:
            return LoopLaxPoint.from_entries(lam, lamb, self.n_modes, self.x_modes)
        except ValueError as exc:
            raise InvalidPoint(str(exc)) from exc

    def _check_range(self, ks):
        bad = [k for k in ks if abs(k) > self.n_modes]
        if bad:
            raise InvalidPoint(f"mode indices {bad} outside [−{self.n_modes}, {self.n_modes}]")


def _entries(raw, key, width):
    rows = raw.get(key, [])
    if not isinstance(rows, list):
        raise ParseError(f"'{key}' must be a list")
    out = []
    for row in rows:
        if not isinstance(row, list) or len(row) not in width:
            raise ParseError(f"'{key}' entries must be lists of length {'/'.join(map(str, width))}")
        for j, v in enumerate(row[:4]):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ParseError(f"'{key}' entry {row!r}: field {j} is not a number")
        out.append(row)
    return out


def _int(raw, key, default):
    v = raw.get(key, default)
    if isinstance(v, bool) or not isinstance(v, int) or v <= 0:
        raise ParseError(f"'{key}' must be a positive integer")
    return v


def _complex_array(obj, shape, key):
    try:
        arr = np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj["im"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"snapshot field '{key}' malformed: {exc}") from exc
    if arr.shape != shape:
        raise ParseError(f"snapshot field '{key}' has shape {arr.shape}, expected {shape}")
    return arr


def parse_config(text):
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ParseError("top level must be a JSON object")
    cfg = PointConfig(n_modes=_int(raw, "n_modes", DEFAULT_N), x_modes=_int(raw, "x_modes", DEFAULT_M))
    seed = raw.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ParseError("'seed' must be an integer")
    cfg.seed = seed
    hams = raw.get("hamiltonians")
    if hams is not None and not (isinstance(hams, list) and all(isinstance(h, str) for h in hams)):
        raise ParseError("'hamiltonians' must be a list of strings like \"v,1\"")
    cfg.hamiltonians = hams
    if raw.get("format") == SNAPSHOT_FORMAT:
        shape = (cfg.x_modes, 2 * cfg.n_modes + 1)
        cfg.arrays = (_complex_array(raw.get("lambda"), shape, "lambda"),
                      _complex_array(raw.get("lambdabar"), shape, "lambdabar"))
        return cfg
    for key in ("lambda", "lambdabar"):
        if key not in raw:
            raise ParseError(f"missing key '{key}'")
    cfg.lam = _entries(raw, "lambda", (3,))
    cfg.lamb = _entries(raw, "lambdabar", (3,))
    cfg.x_modulation = _entries(raw, "x_modulation", (4, 5))
    for row in cfg.x_modulation:
        if len(row) == 5 and row[4] not in ("lambda", "lambdabar"):
            raise ParseError(f"x_modulation target must be lambda or lambdabar, got {row[4]!r}")
    return cfg


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_config(text)


def _split(arr):
    arr = np.asarray(arr)
    return {"re": arr.real.tolist(), "im": arr.imag.tolist()}


def snapshot(lp, **meta):
    """A JSON-ready dict holding the raw coefficient arrays of a loop point."""
    out = {"format": SNAPSHOT_FORMAT, "n_modes": lp.n_modes, "x_modes": lp.x_modes}
    out.update(meta)
    out["lambda"] = _split(lp.lam.coeffs)
    out["lambdabar"] = _split(lp.lamb.coeffs)
    return out


def dump_json(obj):
    return json.dumps(obj, sort_keys=True, indent=1, ensure_ascii=False) + "\n"


def write_text(path, text):
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc.strerror}") from exc

