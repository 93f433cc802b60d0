"""Line-oriented instance files.

A header of ``key value`` lines (kind, n, seed, scalar parameters) is
followed by named blocks: a line ``[name]`` and then whitespace-separated
numbers, one matrix row or vector per line.  Floats are written with
``repr`` so files round-trip exactly.  ``#`` starts a comment line.
"""
from __future__ import annotations

import numpy as np

from .base import InstanceError
from .mis import MisInstance
from .portfolio import PortfolioInstance
from .sk import SkInstance


def _row(v):
    return " ".join(repr(float(a)) if isinstance(a, (float, np.floating)) else str(int(a)) for a in v)


def _dump(header, blocks):
    lines = [f"{k} {v}" for k, v in header.items()]
    for name, rows in blocks.items():
        lines.append(f"[{name}]")
        lines.extend(_row(r) for r in rows)
    return "\n".join(lines) + "\n"


def dumps_instance(inst):
    if isinstance(inst, SkInstance):
        return _dump({"kind": "sk", "n": inst.n, "seed": inst.seed}, {"J": inst.J})
    if isinstance(inst, MisInstance):
        return _dump({"kind": "mis", "n": inst.n, "seed": inst.seed, "p": inst.p},
                     {"edges": inst.edges})
    if isinstance(inst, PortfolioInstance):
        head = {"kind": "portfolio", "n": inst.n, "seed": inst.seed, "budget": repr(float(inst.budget)),
                "q": repr(float(inst.q)), "k": inst.k, "cap": repr(float(inst.cap)),
                "cont_min": repr(float(inst.cont_min))}
        return _dump(head, {"mu": [inst.mu], "price": [inst.price], "lots": [inst.lots],
                            "Sigma": inst.Sigma})
    raise TypeError(f"not an instance: {type(inst).__name__}")


def _opt(v, cast):
    return None if v in (None, "None") else cast(v)


def loads_instance(text):
    head, blocks, cur = {}, {}, None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            cur = line[1:-1]
            blocks[cur] = []
        elif cur is None:
            key, _, val = line.partition(" ")
            head[key] = val.strip()
        else:
            try:
                blocks[cur].append([float(t) for t in line.split()])
            except ValueError:
                raise InstanceError(f"line {lineno}: non-numeric data") from None
    try:
        kind, n = head["kind"], int(head["n"])
        seed = _opt(head.get("seed"), int)
        if kind == "sk":
            return SkInstance(n, np.array(blocks["J"]), seed)
        if kind == "mis":
            edges = [(int(u), int(v)) for u, v in blocks.get("edges", [])]
            return MisInstance(n, edges, _opt(head.get("p"), float), seed)
        if kind == "portfolio":
            return PortfolioInstance(
                n=n, mu=np.array(blocks["mu"][0]), Sigma=np.array(blocks["Sigma"]),
                price=np.array(blocks["price"][0]), budget=float(head["budget"]), q=float(head["q"]),
                k=int(head["k"]), cap=float(head["cap"]), lots=np.array(blocks["lots"][0], dtype=int),
                cont_min=float(head["cont_min"]), seed=seed)
    except (KeyError, IndexError, ValueError) as e:
        if isinstance(e, InstanceError):
            raise
        raise InstanceError(f"malformed instance file: {e!r}") from None
    raise InstanceError(f"unknown instance kind {head.get('kind')!r}")


def save_instance(inst, path):
    with open(path, "w") as fh:
        fh.write(dumps_instance(inst))


def load_instance(path):
    with open(path) as fh:
        return loads_instance(fh.read())
