"""Run configuration: JSON document, schema validation, overrides and hash."""

import copy
import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema

from .errors import ConfigurationError
from .geometry.models import model_from_dict
from .spectrum import CountingConvention

DEFAULT_TOLERANCES = {"newton": 1e-10, "shorten": 1e-4, "dedupe": 1e-6, "curvature_margin": 1e-3}
DEFAULT_ANALYSIS = {
    "s": [1.0, 2.0],
    "k_max": 200,
    "truncation_T": None,
    "window": None,
    "epsilon": 0.5,
    "potentials": ["zero", -0.3, "srb_half"],
    "T_values": None,
    "separation": {"delta": 1.0, "B": 2.5, "samples": 64},
    "corollary": {"n": 1},
}
# fields that change where or how fast a run happens, not what it computes
UNHASHED = ("output_dir", "workers")


def _schema():
    text = resources.files("lengthspec").joinpath("config.schema.json").read_text("utf-8")
    return json.loads(text)


@dataclass(frozen=True)
class RunConfig:
    model: dict
    max_word_length: int
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    counting_convention: str = "primitive-only/unoriented"
    unoriented: bool = True
    output_dir: str = "out"
    seed: int = 0
    method: str = "orbits"
    workers: int = None
    per_unit: float = 4.0
    analysis: dict = field(default_factory=lambda: copy.deepcopy(DEFAULT_ANALYSIS))

    @classmethod
    def from_dict(cls, data):
        try:
            jsonschema.validate(data, _schema())
        except jsonschema.ValidationError as exc:
            where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
            raise ConfigurationError(f"invalid config at {where}: {exc.message}") from None
        data = copy.deepcopy(data)
        tol = dict(DEFAULT_TOLERANCES)
        tol.update(data.pop("tolerances", {}))
        analysis = copy.deepcopy(DEFAULT_ANALYSIS)
        for key, value in data.pop("analysis", {}).items():
            if isinstance(value, dict) and isinstance(analysis.get(key), dict):
                analysis[key].update(value)
            else:
                analysis[key] = value
        cfg = cls(tolerances=tol, analysis=analysis, **data)
        CountingConvention.parse(cfg.counting_convention)
        return cfg

    @classmethod
    def load(cls, path, overrides=()):
        try:
            data = json.loads(Path(path).read_text("utf-8"))
        except OSError as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"config {path} is not valid JSON: {exc}") from None
        for item in overrides:
            apply_override(data, item)
        return cls.from_dict(data)

    def to_dict(self):
        return {
            "model": self.model, "max_word_length": self.max_word_length,
            "tolerances": self.tolerances, "counting_convention": self.counting_convention,
            "unoriented": self.unoriented, "output_dir": self.output_dir, "seed": self.seed,
            "method": self.method, "workers": self.workers, "per_unit": self.per_unit,
            "analysis": self.analysis,
        }

    @property
    def convention(self):
        return CountingConvention.parse(self.counting_convention)

    @property
    def hash(self):
        body = {k: v for k, v in self.to_dict().items() if k not in UNHASHED}
        text = json.dumps(body, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()

    def build_model(self):
        return model_from_dict(self.model)


def apply_override(data, item):
    """Apply ``dotted.key=value`` in place; the value is parsed as JSON when
    possible and kept as a string otherwise."""
    key, sep, raw = item.partition("=")
    if not sep or not key:
        raise ConfigurationError(f"override {item!r} is not of the form key=value")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    node = data
    parts = key.split(".")
    for part in parts[:-1]:
        node = node.setdefault(part, {})
        if not isinstance(node, dict):
            raise ConfigurationError(f"override {key!r} descends into a non-object")
    node[parts[-1]] = value
