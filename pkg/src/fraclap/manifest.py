"""Run manifests: a documented key = value text format.

A manifest fully determines a batch run: subcommand, domain, operation
parameters, and the seed.  Serialization is canonical (sorted keys,
repr-formatted numbers) so write -> parse round-trips bit-exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

FORMAT_VERSION = "1"

SUBCOMMANDS = (
    "verify-cordoba",
    "verify-lower-bound",
    "probe-heat-bounds",
    "probe-grad-bounds",
    "halfspace-suite",
    "probe-v0",
    "commutator-suite",
    "run-linear",
    "run-sqg",
    "frac-oracle",
)


class ManifestError(ValueError):
    """Structured manifest failure naming the offending keys."""

    def __init__(self, message, keys=()):
        super().__init__(message)
        self.keys = tuple(keys)


def _parse_float_list(text):
    return tuple(float(v) for v in str(text).split(",") if v != "")


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (tuple, list)):
        return ",".join(repr(float(v)) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


# key -> (parser, default); None default means required
_SCHEMA = {
    "format_version": (str, FORMAT_VERSION),
    "subcommand": (str, None),
    "dim": (int, 1),
    "lengths": (_parse_float_list, (float(np.pi),)),
    "mode_cutoff": (int, 32),
    "grid_n": (int, 128),
    "seed": (int, 0),
    "out_dir": (str, "out"),
    # operation parameters (subcommands read what they need)
    "samples": (int, 20),
    "alpha": (float, 0.5),
    "alphas": (_parse_float_list, (0.25, 0.5, 0.75)),
    "s_values": (_parse_float_list, (0.5, 1.0, 1.5, 2.0)),
    "c_grid": (_parse_float_list, (0.5, 1.0, 2.0, 4.0)),
    "nodes": (int, 200),
    "epsilon": (float, 0.0),  # 0 means per-domain default
    "t_max": (float, 0.0),
    "dt": (float, 1e-3),
    "t_end": (float, 1.0),
    "galerkin_m": (int, 0),  # 0 means the domain cutoff
    "cfl_safety": (float, 0.5),
    "diag_every": (int, 1),
    "xd_samples": (_parse_float_list, (0.5, 1.0, 2.0, 4.0)),
    "t_samples": (_parse_float_list, ()),
}


@dataclass
class RunManifest:
    """Validated, canonically ordered run description."""

    values: dict = field(default_factory=dict)

    def __post_init__(self):
        unknown = [k for k in self.values if k not in _SCHEMA]
        if unknown:
            raise ManifestError(
                f"unknown manifest keys: {', '.join(sorted(unknown))}",
                keys=sorted(unknown),
            )
        parsed = {}
        bad = []
        for key, (parser, default) in _SCHEMA.items():
            if key in self.values:
                raw = self.values[key]
                try:
                    if parser is _parse_float_list and not isinstance(raw, str):
                        parsed[key] = tuple(float(v) for v in raw)
                    else:
                        parsed[key] = parser(raw)
                except (TypeError, ValueError):
                    bad.append(key)
            elif default is None:
                raise ManifestError(f"missing required key: {key}", keys=[key])
            else:
                parsed[key] = default
        if bad:
            raise ManifestError(
                f"type mismatch for keys: {', '.join(sorted(bad))}", keys=sorted(bad)
            )
        if parsed["subcommand"] not in SUBCOMMANDS:
            raise ManifestError(
                f"unknown subcommand {parsed['subcommand']!r}", keys=["subcommand"]
            )
        self.values = parsed

    def __getitem__(self, key):
        return self.values[key]

    def canonical_text(self):
        lines = [f"{k} = {_fmt(self.values[k])}" for k in sorted(self.values)]
        return "\n".join(lines) + "\n"


def parse_manifest(path):
    """Parse and validate a manifest file."""
    raw = {}
    dupes = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ManifestError(f"line {lineno}: expected 'key = value'")
            key, _, value = stripped.partition("=")
            key = key.strip()
            if key in raw:
                dupes.append(key)
            raw[key] = value.strip()
    if dupes:
        raise ManifestError(f"duplicate keys: {', '.join(sorted(dupes))}", keys=dupes)
    return RunManifest(raw)


def write_manifest(manifest, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(manifest.canonical_text())
