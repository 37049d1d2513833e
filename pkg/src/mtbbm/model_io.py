"""Plain-text model files.

Format (``#`` starts a comment, blank lines ignored)::

    types = 2
    alpha0 = 1.0
    name = B
    rate 1 = 1.0
    rate 2 = 1.0

    offspring 1:
      0 2  1.0
    offspring 2:
      2 0  1.0

Type ids are 1-based in files (they match the usual mathematical labels) and
0-based everywhere in the API.  Each offspring row lists the d offspring
counts followed by the probability.  Floats are written with ``repr`` so a
save/load round trip reproduces the model bit-exactly.
"""

from __future__ import annotations

import os

from .errors import ModelError
from .models import BUILTIN_MODELS, ModelSpec


def dumps(spec: ModelSpec) -> str:
    lines = [f"types = {spec.d}", f"alpha0 = {spec.alpha0!r}"]
    if spec.name:
        lines.append(f"name = {spec.name}")
    for i, a in enumerate(spec.rates):
        lines.append(f"rate {i + 1} = {a!r}")
    for i, law in enumerate(spec.offspring):
        lines.append("")
        lines.append(f"offspring {i + 1}:")
        for kvec, p in law:
            lines.append("  " + " ".join(str(k) for k in kvec) + f"  {p!r}")
    return "\n".join(lines) + "\n"


def loads(text: str) -> ModelSpec:
    d = None
    alpha0 = 1.0
    name = ""
    rates: dict[int, float] = {}
    laws: dict[int, list[tuple[tuple[int, ...], float]]] = {}
    current: int | None = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            if line.startswith("offspring") and line.endswith(":"):
                current = int(line[len("offspring") : -1].strip()) - 1
                if current in laws:
                    raise ModelError(f"duplicate offspring section for type {current + 1}")
                laws[current] = []
            elif "=" in line:
                current = None
                key, value = (part.strip() for part in line.split("=", 1))
                if key == "types":
                    d = int(value)
                elif key == "alpha0":
                    alpha0 = float(value)
                elif key == "name":
                    name = value
                elif key.startswith("rate"):
                    rates[int(key[len("rate") :].strip()) - 1] = float(value)
                else:
                    raise ModelError(f"unknown key {key!r}")
            elif current is not None:
                parts = line.split()
                laws[current].append((tuple(int(k) for k in parts[:-1]), float(parts[-1])))
            else:
                raise ModelError(f"stray line {line!r}")
        except (ValueError, ModelError) as exc:
            raise ModelError(f"model file line {lineno}: {exc}") from exc

    if d is None:
        raise ModelError("model file is missing 'types = <d>'")
    missing_rates = [i + 1 for i in range(d) if i not in rates]
    missing_laws = [i + 1 for i in range(d) if i not in laws]
    if missing_rates or missing_laws:
        raise ModelError(
            f"model file incomplete: missing rates for types {missing_rates}, "
            f"offspring for types {missing_laws}"
        )
    return ModelSpec(
        rates=tuple(rates[i] for i in range(d)),
        offspring=tuple(tuple(laws[i]) for i in range(d)),
        alpha0=alpha0,
        name=name,
    )


def save(spec: ModelSpec, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(spec))


def load(path: str | os.PathLike) -> ModelSpec:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def resolve_model(name_or_path: str) -> ModelSpec:
    """Builtin model name ('A', 'B', 'C') or a path to a model file."""
    if name_or_path in BUILTIN_MODELS:
        return BUILTIN_MODELS[name_or_path]()
    if not os.path.exists(name_or_path):
        raise FileNotFoundError(f"model file not found: {name_or_path}")
    return load(name_or_path)
