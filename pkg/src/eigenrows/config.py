"""INI-style experiment configs: parsing, validation, and default dumps.

The grammar has three sections.  [experiment] holds the kind and run-level
knobs, [model] the model-family parameters, [output] the emission options.
Every key is typed below; unknown sections or keys are rejected rather than
ignored so typos cannot silently fall back to defaults.
"""

import configparser
import io

from .errors import ConfigError
from .harness import ExperimentConfig, default_config

_EXPERIMENT_KEYS = {
    "kind": str,
    "n": int,
    "replicates": int,
    "base_seed": int,
    "alpha": float,
    "eta": float,
    "vertex": int,
    "n_pos": int,
    "n_neg": int,
    "sparsity_c": float,
    "sparsity_k": float,
    "rho": float,
    "alt_count": int,
    "workers": int,
}

_MODEL_KEYS = {
    "a": float,
    "b": float,
    "p_val": float,
    "q_val": float,
    "tau": float,
    "n_pure": int,
    "t_min": float,
    "t_max": float,
    "b_diag": float,
    "b_off": float,
}

_OUTPUT_KEYS = {
    "dir": str,
    "emit_histograms": bool,
}

_SECTIONS = {
    "experiment": _EXPERIMENT_KEYS,
    "model": _MODEL_KEYS,
    "output": _OUTPUT_KEYS,
}

_BOOL_TRUE = ("1", "true", "yes", "on")
_BOOL_FALSE = ("0", "false", "no", "off")


def _coerce(section, key, raw):
    typ = _SECTIONS[section][key]
    if typ is str:
        return raw
    if typ is bool:
        lowered = raw.strip().lower()
        if lowered in _BOOL_TRUE:
            return True
        if lowered in _BOOL_FALSE:
            return False
        raise ConfigError(f"[{section}] {key} must be a boolean, got {raw!r}")
    try:
        return typ(raw)
    except ValueError as exc:
        raise ConfigError(
            f"[{section}] {key} must be {typ.__name__}, got {raw!r}"
        ) from exc


def parse_config(path):
    """Read an INI config file into (ExperimentConfig, output options).

    The output options dict carries "dir" (or None when unset).

    Raises:
        FileNotFoundError: if the path does not exist.
        ConfigError: on unknown sections or keys, type errors, a missing
            kind, or invalid field combinations.
    """
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, "r", encoding="utf-8") as handle:
            parser.read_file(handle)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    unknown_sections = sorted(set(parser.sections()) - set(_SECTIONS))
    if unknown_sections:
        raise ConfigError(f"unknown config sections {unknown_sections}")
    values = {}
    output = {"dir": None}
    emit_histograms = None
    for section, keys in _SECTIONS.items():
        if not parser.has_section(section):
            continue
        for key, raw in parser.items(section):
            if key not in keys:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
            value = _coerce(section, key, raw)
            if section == "output":
                if key == "dir":
                    output["dir"] = value
                else:
                    emit_histograms = value
            else:
                values[key] = value
    kind = values.pop("kind", None)
    if kind is None:
        raise ConfigError("the [experiment] section must set kind")
    if emit_histograms is not None:
        values["emit_histograms"] = emit_histograms
    return default_config(kind, **values), output


def _format_value(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dump_default(kind):
    """Default config for a kind rendered as INI text.

    Parsing the rendered text back yields an equal ExperimentConfig.
    """
    cfg = default_config(kind)
    buf = io.StringIO()
    buf.write("[experiment]\n")
    for key in _EXPERIMENT_KEYS:
        value = getattr(cfg, key)
        if value is None:
            continue
        buf.write(f"{key} = {_format_value(value)}\n")
    model_lines = [
        f"{key} = {_format_value(getattr(cfg, key))}"
        for key in _MODEL_KEYS
        if getattr(cfg, key) is not None
    ]
    if model_lines:
        buf.write("\n[model]\n")
        for line in model_lines:
            buf.write(line + "\n")
    buf.write("\n[output]\n")
    buf.write(f"emit_histograms = {_format_value(cfg.emit_histograms)}\n")
    return buf.getvalue()
