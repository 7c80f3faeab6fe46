"""Text checkpoints: JSON with hex-float parameters, exact on reload."""

from __future__ import annotations

import json

import numpy as np

FORMAT = "aahc-sim-checkpoint"
VERSION = 1


class CheckpointError(ValueError):
    pass


def encode(param_sets: dict, meta: dict) -> str:
    params = {}
    for name in sorted(param_sets):
        entry = param_sets[name]
        params[name] = {
            "sizes": [int(s) for s in entry["sizes"]],
            "arrays": [{"shape": list(np.shape(a)),
                        "data": [float(x).hex() for x in np.asarray(a, dtype=np.float64).ravel()]}
                       for a in entry["arrays"]],
        }
    doc = {"format": FORMAT, "version": VERSION, "meta": meta, "params": params}
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def decode(text: str, source: str = "<checkpoint>") -> tuple[dict, dict]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"{source}: not a complete checkpoint ({exc.msg} at line {exc.lineno})") from None
    if not isinstance(doc, dict) or doc.get("format") != FORMAT:
        raise CheckpointError(f"{source}: not an {FORMAT} file")
    if doc.get("version") != VERSION:
        raise CheckpointError(f"{source}: checkpoint version {doc.get('version')} != supported {VERSION}")
    sets = {}
    try:
        for name, entry in doc["params"].items():
            arrays = []
            for a in entry["arrays"]:
                flat = np.array([float.fromhex(x) for x in a["data"]], dtype=np.float64)
                if flat.size != int(np.prod(a["shape"], dtype=np.int64)):
                    raise CheckpointError(f"{source}: {name} data length does not match shape {a['shape']}")
                arrays.append(flat.reshape(a["shape"]))
            sets[name] = {"sizes": entry["sizes"], "arrays": arrays}
        meta = doc["meta"]
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, CheckpointError):
            raise
        raise CheckpointError(f"{source}: malformed checkpoint ({exc})") from None
    return sets, meta


def save_checkpoint(path: str, param_sets: dict, meta: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(encode(param_sets, meta))


def load_checkpoint(path: str) -> tuple[dict, dict]:
    with open(path, encoding="utf-8") as fh:
        return decode(fh.read(), path)
