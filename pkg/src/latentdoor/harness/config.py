# Copyright 2025 Dragos Crintea - HikariLabs LTD
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#       http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Experiment configuration.

An experiment file is a YAML mapping of sections with flat ``key: value``
entries::

    experiment:
      name: desk
      seed: 7
    attacks:
      epsilons: ["8/255", "16/255", "32/255"]

Unknown sections or keys are rejected. Budgets may be written as fractions
(``"8/255"``). Every random choice of a run flows from ``experiment.seed``
through :func:`derive_seed`, so the validated config plus that seed fix
every output byte.
"""

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction
from typing import Any, Iterable, Optional, Union

import yaml

from latentdoor.data.triggers import TriggerSpec
from latentdoor.errors import ConfigParseError, InvalidConfigError
from latentdoor.fileio import PathLike, read_text
from latentdoor.numerics.tensor import Precision
from latentdoor.training.config import TrainConfig

TRIGGER_FAMILIES = ("badnets", "blend", "wanet")
DEFENSE_NAMES = ("identity", "unlearn", "distill", "alt_unlearn")


def parse_number(value: Any) -> float:
    """A float from a number or a fraction string such as ``"8/255"``."""
    if isinstance(value, bool):
        raise InvalidConfigError(f"Expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    try:
        return float(Fraction(str(value).strip()))
    except (ValueError, ZeroDivisionError) as exc:
        raise InvalidConfigError(f"Expected a number or fraction, got {value!r}") from exc


def _numbers(values: Any) -> tuple[float, ...]:
    if not isinstance(values, (list, tuple)):
        values = [values]
    return tuple(parse_number(v) for v in values)


def _names(values: Any, allowed: tuple[str, ...], what: str) -> tuple[str, ...]:
    if isinstance(values, str):
        values = [values]
    names = tuple(str(v).lower() for v in values)
    unknown = [n for n in names if n not in allowed]
    if unknown or not names:
        raise InvalidConfigError(
            f"{what} must be a non-empty list out of {', '.join(allowed)}; got {list(values)!r}"
        )
    return names


@dataclass(frozen=True)
class ExperimentSection:
    name: str = "desk"
    seed: Optional[int] = None
    precision: str = "single"

    def __post_init__(self):
        if self.seed is None:
            raise InvalidConfigError("experiment.seed must be set explicitly")
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidConfigError(
                f"experiment.seed must be a 64-bit unsigned int, got {self.seed!r}"
            )
        object.__setattr__(self, "seed", int(self.seed))
        Precision(self.precision)

    @property
    def dtype_precision(self) -> Precision:
        return Precision(self.precision)


@dataclass(frozen=True)
class DataSection:  # pylint: disable=R0902
    """Synthetic generator settings, or an IDX import split three ways."""

    source: str = "synthetic"
    num_classes: int = 4
    shape: tuple[int, int, int] = (3, 16, 16)
    train_per_class: int = 150
    val_per_class: int = 40
    test_per_class: int = 40
    idx_images: Optional[str] = None
    idx_labels: Optional[str] = None
    val_fraction: float = 0.15
    test_fraction: float = 0.15

    def __post_init__(self):
        if self.source not in ("synthetic", "idx"):
            raise InvalidConfigError(f"data.source must be synthetic or idx, got {self.source!r}")
        object.__setattr__(self, "shape", tuple(int(d) for d in self.shape))
        if len(self.shape) != 3:
            raise InvalidConfigError(f"data.shape must be [C, H, W], got {list(self.shape)!r}")
        if self.source == "idx" and not (self.idx_images and self.idx_labels):
            raise InvalidConfigError("data.source=idx needs idx_images and idx_labels")
        if not (0 < self.val_fraction < 1 and 0 < self.test_fraction < 1):
            raise InvalidConfigError("val_fraction and test_fraction must lie in (0, 1)")
        if self.val_fraction + self.test_fraction >= 1:
            raise InvalidConfigError("val_fraction + test_fraction must leave training data")


@dataclass(frozen=True)
class ModelSection:
    preset: str = "micronet"


@dataclass(frozen=True)
class TriggerSection:  # pylint: disable=R0902
    families: tuple[str, ...] = TRIGGER_FAMILIES
    target_label: int = 0
    badnets_patch: int = 3
    badnets_value: float = 1.0
    blend_alpha: float = 0.2
    blend_seed: int = 0
    wanet_grid: int = 4
    wanet_strength: float = 0.5
    wanet_seed: int = 0

    def __post_init__(self):
        object.__setattr__(
            self, "families", _names(self.families, TRIGGER_FAMILIES, "triggers.families")
        )
        object.__setattr__(self, "blend_alpha", parse_number(self.blend_alpha))

    def spec(self, family: str) -> TriggerSpec:
        """The trigger of one family with this section's parameters."""
        if family == "badnets":
            return TriggerSpec.badnets(
                self.badnets_patch, value=self.badnets_value, target_label=self.target_label
            )
        if family == "blend":
            return TriggerSpec.blend(
                self.blend_alpha, pattern_seed=self.blend_seed, target_label=self.target_label
            )
        if family == "wanet":
            return TriggerSpec.wanet(
                self.wanet_grid, self.wanet_strength, self.wanet_seed, self.target_label
            )
        raise InvalidConfigError(f"Unknown trigger family {family!r}")


@dataclass(frozen=True)
class PoisoningSection:
    rates: tuple[float, ...] = (0.05, 0.10)

    def __post_init__(self):
        rates = _numbers(self.rates)
        if not rates or any(not 0 < r < 1 for r in rates):
            raise InvalidConfigError(f"poisoning.rates must lie in (0, 1), got {list(rates)!r}")
        object.__setattr__(self, "rates", rates)


@dataclass(frozen=True)
class AttackSection:  # pylint: disable=R0902
    epsilons: tuple[float, ...] = (8 / 255, 16 / 255, 32 / 255)
    step_alpha: float = 2 / 255
    pgd_steps: int = 20
    fga_steps: int = 200
    beta: float = 1.0
    betas: tuple[float, ...] = (0.0, 0.1, 1.0, 10.0)
    sweep_epsilon: float = 32 / 255
    init_eta: Optional[float] = None
    sample_limit: int = 100
    chunk_size: int = 64

    def __post_init__(self):
        epsilons = _numbers(self.epsilons)
        if not epsilons or any(not e > 0 for e in epsilons):
            raise InvalidConfigError(f"attacks.epsilons must all be > 0, got {list(epsilons)!r}")
        object.__setattr__(self, "epsilons", epsilons)
        object.__setattr__(self, "betas", _numbers(self.betas))
        for name in ("step_alpha", "beta", "sweep_epsilon"):
            object.__setattr__(self, name, parse_number(getattr(self, name)))
        if self.init_eta is not None:
            object.__setattr__(self, "init_eta", parse_number(self.init_eta))
        if not self.sweep_epsilon > 0:
            raise InvalidConfigError("attacks.sweep_epsilon must be > 0")
        if self.sample_limit < 1 or self.chunk_size < 1:
            raise InvalidConfigError("attacks.sample_limit and chunk_size must be >= 1")


@dataclass(frozen=True)
class DefenseSection:  # pylint: disable=R0902
    names: tuple[str, ...] = DEFENSE_NAMES
    unlearn_epochs: int = 5
    triggered_fraction: float = 0.10
    distill_epochs: int = 10
    lambda_attn: float = 0.5
    distill_fraction: float = 0.2
    lr: float = 0.01
    alt_samples: int = 100

    def __post_init__(self):
        object.__setattr__(self, "names", _names(self.names, DEFENSE_NAMES, "defenses.names"))
        if not 0 < self.distill_fraction <= 1:
            raise InvalidConfigError("defenses.distill_fraction must lie in (0, 1]")
        if self.alt_samples < 1:
            raise InvalidConfigError("defenses.alt_samples must be >= 1")


@dataclass(frozen=True)
class OutputSection:
    dir: str = "runs/desk"


_SECTIONS = {
    "experiment": ExperimentSection,
    "data": DataSection,
    "model": ModelSection,
    "training": TrainConfig,
    "triggers": TriggerSection,
    "poisoning": PoisoningSection,
    "attacks": AttackSection,
    "defenses": DefenseSection,
    "output": OutputSection,
}


@dataclass(frozen=True)
class ExperimentConfig:  # pylint: disable=R0902
    """A validated experiment file."""

    experiment: ExperimentSection
    data: DataSection = field(default_factory=DataSection)
    model: ModelSection = field(default_factory=ModelSection)
    training: TrainConfig = field(default_factory=TrainConfig)
    triggers: TriggerSection = field(default_factory=TriggerSection)
    poisoning: PoisoningSection = field(default_factory=PoisoningSection)
    attacks: AttackSection = field(default_factory=AttackSection)
    defenses: DefenseSection = field(default_factory=DefenseSection)
    output: OutputSection = field(default_factory=OutputSection)

    @property
    def seed(self) -> int:
        return self.experiment.seed  # type: ignore[return-value]

    def to_dict(self) -> dict[str, Any]:
        return {
            name: {
                key: list(value) if isinstance(value, tuple) else value
                for key, value in asdict(getattr(self, name)).items()
            }
            for name in _SECTIONS
        }


def _build_section(name: str, raw: Any):
    cls = _SECTIONS[name]
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigParseError(f"Section [{name}] must be a mapping, got {type(raw).__name__}")
    known = {f.name for f in fields(cls)}
    if name == "training":
        known.discard("seed")
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigParseError(
            f"Unknown key(s) in [{name}]: {', '.join(map(str, unknown))}. "
            f"Known: {', '.join(sorted(known))}"
        )
    try:
        return cls(**raw)
    except (TypeError, ValueError) as exc:
        raise ConfigParseError(f"[{name}] {exc}") from exc


def parse_experiment_config(document: Any) -> ExperimentConfig:
    """Validates an already parsed document.

    Raises:
        ConfigParseError: On unknown sections or keys and on invalid values.
    """
    if not isinstance(document, dict):
        raise ConfigParseError("An experiment file must be a mapping of sections")
    unknown = sorted(set(document) - set(_SECTIONS))
    if unknown:
        raise ConfigParseError(
            f"Unknown section(s): {', '.join(map(str, unknown))}. "
            f"Known: {', '.join(_SECTIONS)}"
        )
    if "experiment" not in document:
        raise ConfigParseError("Missing [experiment] section with an explicit seed")
    return ExperimentConfig(
        **{name: _build_section(name, document[name]) for name in _SECTIONS if name in document}
    )


def apply_overrides(document: dict[str, Any], overrides: Iterable[str]) -> dict[str, Any]:
    """Patches ``section.key=value`` overrides into a copy of ``document``.

    Values are parsed as YAML scalars or lists (``8/255`` stays a string and
    is converted by the section).
    """
    patched = {k: dict(v or {}) for k, v in document.items()}
    for override in overrides:
        path, sep, raw = override.partition("=")
        section, dot, key = path.strip().partition(".")
        if not sep or not dot or not section or not key:
            raise ConfigParseError(
                f"Override {override!r} must look like section.key=value"
            )
        if section not in _SECTIONS:
            raise ConfigParseError(f"Override {override!r} names unknown section {section!r}")
        try:
            value = yaml.safe_load(raw)
        except yaml.YAMLError as exc:
            raise ConfigParseError(f"Override {override!r} has an unparsable value") from exc
        patched.setdefault(section, {})[key.strip()] = value
    return patched


def load_experiment_config(
    source: Union[PathLike, dict[str, Any]],
    overrides: Iterable[str] = (),
    seed: Optional[int] = None,
    out_dir: Optional[str] = None,
) -> ExperimentConfig:
    """Reads, patches and validates an experiment file.

    Args:
        source: Path to a YAML file, or an already parsed document.
        overrides: ``section.key=value`` patches applied before validation.
        seed: Replaces ``experiment.seed`` when given.
        out_dir: Replaces ``output.dir`` when given.

    Raises:
        MissingArtifactError: If the file does not exist.
        ConfigParseError: If it does not parse or validate.
    """
    if isinstance(source, dict):
        document = source
    else:
        try:
            document = yaml.safe_load(read_text(source, "experiment config"))
        except yaml.YAMLError as exc:
            raise ConfigParseError(f"Cannot parse {source!s}: {exc}") from exc
    if not isinstance(document, dict):
        raise ConfigParseError("An experiment file must be a mapping of sections")
    extra = list(overrides)
    if seed is not None:
        extra.append(f"experiment.seed={int(seed)}")
    if out_dir is not None:
        extra.append(f"output.dir={json.dumps(str(out_dir))}")
    return parse_experiment_config(apply_overrides(document, extra))


def derive_seed(root: int, phase: str, *labels: Any) -> int:
    """64-bit seed for one phase (and optional labels) of a run.

    ``derive_seed(7, "poison", "badnets", 0.1)`` is the same on every
    platform and independent of every other phase's seed.
    """
    key = ":".join([str(int(root)), phase, *(str(label) for label in labels)])
    return int.from_bytes(hashlib.sha256(key.encode("utf-8")).digest()[:8], "big")


def config_hash(cfg: ExperimentConfig) -> str:
    """SHA-256 over the canonical JSON of the validated config."""
    canonical = json.dumps(cfg.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
