"""INI-style study configuration.

Sections and keys (defaults in brackets, * = required in a config file)::

    [grid]        L [50], N [1024]
    [physics]     alpha*, d_av*, datum [gaussian], amplitude [1], width [1],
                  chirp [0], center [0], carrier [0]
    [stepper]     n_sub [16], avg_dt [0.0025], samples_per_period [8],
                  h1_cap_factor [1000]
    [quadrature]  kind [gauss_legendre], n_r [24]
    [study]       M*, epsilons [0.2, 0.1, 0.05, 0.025], seed [0], workers [1],
                  trials [200]

Unknown sections or keys are rejected.  Overrides (``section.key=value``)
win over the file.
"""
from __future__ import annotations

import configparser
from pathlib import Path

from .experiments import StudyConfig
from .spectral import InitialDatum


class ConfigError(ValueError):
    pass


def _float_list(text):
    items = [s for s in text.replace(";", ",").replace("{", "").replace("}", "").split(",") if s.strip()]
    return tuple(float(s) for s in items)


SCHEMA = {
    "grid": {"L": float, "N": int},
    "physics": {"alpha": float, "d_av": float, "datum": str, "amplitude": float, "width": float,
                "chirp": float, "center": float, "carrier": float},
    "stepper": {"n_sub": int, "avg_dt": float, "samples_per_period": int, "h1_cap_factor": float},
    "quadrature": {"kind": str, "n_r": int},
    "study": {"M": float, "epsilons": _float_list, "seed": int, "workers": int, "trials": int},
}
REQUIRED = ("physics.alpha", "physics.d_av", "study.M")

# built-in study used when no file is given (cubic, positive average dispersion)
BUILTIN = {"physics.alpha": "2", "physics.d_av": "1", "study.M": "1"}

_FIELD = {  # config key -> StudyConfig field
    "grid.L": "L", "grid.N": "N", "physics.alpha": "alpha", "physics.d_av": "d_av",
    "stepper.n_sub": "n_sub", "stepper.avg_dt": "avg_dt", "stepper.samples_per_period": "samples_per_period",
    "stepper.h1_cap_factor": "h1_cap_factor", "quadrature.kind": "quadrature", "quadrature.n_r": "n_r",
    "study.M": "M", "study.epsilons": "epsilons", "study.seed": "seed", "study.workers": "workers",
    "study.trials": "trials",
}
_DATUM = ("datum", "amplitude", "width", "chirp", "center", "carrier")


def _split_override(item):
    if isinstance(item, tuple):
        return item
    key, sep, value = item.partition("=")
    if not sep:
        raise ConfigError(f"override {item!r} must look like section.key=value")
    return key.strip(), value.strip()


def parse_config(path=None, overrides=(), use_builtin: bool | None = None) -> StudyConfig:
    """Read, validate and default-fill a study configuration.

    Without ``path`` the built-in cubic study is the base.  ``overrides`` is
    a mapping or an iterable of ``"section.key=value"`` strings.
    """
    raw = {}
    if path is not None:
        parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        parser.optionxform = str
        try:
            with open(path) as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
        except configparser.Error as exc:
            raise ConfigError(f"malformed config {path}: {exc}") from exc
        for section in parser.sections():
            for key, value in parser.items(section):
                raw[f"{section}.{key}"] = value
    elif use_builtin is not False:
        raw.update(BUILTIN)
    items = overrides.items() if isinstance(overrides, dict) else map(_split_override, overrides)
    for key, value in items:
        raw[key] = str(value)
    return config_from_raw(raw)


def config_from_raw(raw: dict) -> StudyConfig:
    values = {}
    for key, text in raw.items():
        section, _, name = key.partition(".")
        if section not in SCHEMA:
            raise ConfigError(f"unknown section {section!r} (in {key})")
        if name not in SCHEMA[section]:
            raise ConfigError(f"unknown key {key}")
        conv = SCHEMA[section][name]
        try:
            values[key] = conv(text)
        except ValueError:
            raise ConfigError(f"{key}: cannot interpret {text!r} as {getattr(conv, '__name__', conv)}") from None
    for key in REQUIRED:
        if key not in values:
            raise ConfigError(f"missing required key {key}")

    kwargs = {_FIELD[k]: v for k, v in values.items() if k in _FIELD}
    datum_args = {name: values[f"physics.{name}"] for name in _DATUM if f"physics.{name}" in values}
    kind = datum_args.pop("datum", "gaussian")
    try:
        kwargs["datum"] = InitialDatum(kind, **datum_args)
        return StudyConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def config_to_raw(cfg: StudyConfig) -> dict:
    """Normalized ``section.key -> string`` snapshot; ``config_from_raw`` inverts it."""
    inv = {v: k for k, v in _FIELD.items()}
    raw = {}
    for fname, key in sorted(inv.items(), key=lambda kv: kv[1]):
        value = getattr(cfg, fname)
        raw[key] = ", ".join(repr(e) for e in value) if fname == "epsilons" else repr(value) \
            if isinstance(value, float) else str(value)
    d = cfg.datum
    raw["physics.datum"] = d.kind
    for name in _DATUM[1:]:
        raw[f"physics.{name}"] = repr(float(getattr(d, name).real if name == "amplitude" else getattr(d, name)))
    return dict(sorted(raw.items()))


def write_config(cfg: StudyConfig, path) -> None:
    raw = config_to_raw(cfg)
    lines = []
    for section in SCHEMA:
        lines.append(f"[{section}]")
        lines += [f"{k.split('.', 1)[1]} = {v}" for k, v in raw.items() if k.startswith(section + ".")]
        lines.append("")
    Path(path).write_text("\n".join(lines))
