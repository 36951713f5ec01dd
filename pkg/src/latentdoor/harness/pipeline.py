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

"""The desk experiment, phase by phase.

``train -> probe -> attack -> defend -> report``. Each phase reads the
artifacts of the earlier ones from the run directory, writes its own
atomically and records them in ``manifest.yaml``. A phase run twice with
the same config and seed rewrites identical bytes.

Run directory layout::

    data/        train/val/test splits, poisoned training sets, poison plans
    models/      clean, backdoor_<tag>, <defense>_<tag> networks
    histories/   per-epoch training and fine-tuning metrics
    directions/  backdoor directions (YAML)
    probe/       interpolation curves, projections, head projections
    attacks/     per-sample outcomes, histograms, step curves, β sweeps
    defenses/    stored adversarial sets for alternative-trigger unlearning
    reports/     backdoor table and repair table
    figures/     plot-ready bundles

``<tag>`` names one backdoored model, e.g. ``badnets_r100`` for BadNets at a
10% poison rate.
"""

import logging
import math
import time
import warnings
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Optional

import numpy as np
import pandas as pd

from latentdoor.attacks.batch import (
    BatchAttackResult,
    batch_attack,
    beta_sweep,
    label_distribution,
    stamp_adversarial_set,
)
from latentdoor.attacks.config import AttackConfig
from latentdoor.data.dataset import Dataset, Split
from latentdoor.data.idx import import_idx_dataset
from latentdoor.data.poisoning import poison_dataset, save_plan
from latentdoor.data.storage import load_dataset, save_dataset
from latentdoor.data.synthetic import synth_splits
from latentdoor.data.triggers import TriggerSpec, apply_trigger
from latentdoor.defenses.distillation import DistillConfig, distill_repair
from latentdoor.defenses.report import ReportRow, repair_report
from latentdoor.defenses.unlearning import UnlearnConfig, unlearn_trigger
from latentdoor.errors import (
    DegenerateDirectionError,
    EmptyEvaluationSetError,
    ImageTooSmallError,
    MissingArtifactError,
    TooFewCleanSamplesError,
)
from latentdoor.exporters.csv_exporter import (
    to_batch_frame,
    to_beta_sweep_frame,
    to_history_frame,
    to_interpolation_frame,
    to_projection_frame,
    to_report_frame,
    to_step_curve_frame,
    write_csv,
)
from latentdoor.fileio import PathLike
from latentdoor.harness.config import ExperimentConfig, config_hash, derive_seed
from latentdoor.harness.figures import emit_figures
from latentdoor.harness.manifest import MANIFEST_NAME, RunManifest, load_manifest, save_manifest
from latentdoor.harness.metrics import mean_ssim
from latentdoor.models.network import Network
from latentdoor.models.presets import build_preset
from latentdoor.models.serialization import load_network, save_network
from latentdoor.probe.direction import (
    BackdoorDirection,
    estimate_direction,
    head_projection,
    load_direction,
    projection_diagnostics,
    save_direction,
)
from latentdoor.probe.interpolation import interpolation_candidates, interpolation_probe
from latentdoor.training.trainer import attack_success_rate, evaluate_accuracy, train

logger = logging.getLogger(__name__)

PHASES = ("train", "probe", "attack", "defend", "report")


def rate_tag(rate: float) -> str:
    """``0.1 -> "r100"``: the poison rate in tenths of a percent."""
    return f"r{round(rate * 1000):03d}"


def eps_tag(epsilon: float) -> str:
    """``8/255 -> "eps8"``: the budget in 1/255 units."""
    return f"eps{epsilon * 255:.4g}"


@dataclass(frozen=True)
class BackdoorVariant:
    """One (trigger family, poison rate) model of the grid."""

    family: str
    rate: float
    spec: TriggerSpec

    @property
    def tag(self) -> str:
        return f"{self.family}_{rate_tag(self.rate)}"


class ExperimentRun:  # pylint: disable=R0902
    """Runs the phases of one experiment inside a run directory."""

    def __init__(
        self,
        cfg: ExperimentConfig,
        run_dir: Optional[PathLike] = None,
        threads: int = 1,
        progress: bool = False,
    ):
        self.cfg = cfg
        self.run_dir = Path(run_dir if run_dir is not None else cfg.output.dir)
        self.threads = threads
        self.progress = progress
        self.precision = cfg.experiment.dtype_precision
        self.config_hash = config_hash(cfg)
        self.manifest = self._open_manifest()

    # --------------------------------------------------------------- plumbing

    def _open_manifest(self) -> RunManifest:
        if (self.run_dir / MANIFEST_NAME).is_file():
            manifest = load_manifest(self.run_dir)
            if manifest.config_hash == self.config_hash:
                return manifest
            logger.warning("Config changed since the last run in %s; starting a new manifest",
                           self.run_dir)
        return RunManifest(self.config_hash)

    def path(self, *parts: str) -> Path:
        return self.run_dir.joinpath(*parts)

    def seed(self, phase: str, *labels) -> int:
        return derive_seed(self.cfg.seed, phase, *labels)

    def variants(self) -> list[BackdoorVariant]:
        return [
            BackdoorVariant(family, rate, self.cfg.triggers.spec(family))
            for family in self.cfg.triggers.families
            for rate in self.cfg.poisoning.rates
        ]

    def _record(self, name: str, path: Path) -> Path:
        self.manifest.add(name, path, self.run_dir)
        return path

    def _write_csv(self, name: str, frame: pd.DataFrame, *parts: str) -> Path:
        path = self.path(*parts)
        write_csv(frame, path)
        return self._record(name, path)

    def _save_network(self, name: str, net: Network) -> Path:
        path = self.path("models", f"{name}.bdlm")
        save_network(net, path)
        return self._record(f"model:{name}", path)

    def load_model(self, name: str) -> Network:
        return load_network(self.path("models", f"{name}.bdlm"), self.precision)

    def load_split(self, split: Split) -> Dataset:
        return load_dataset(self.path("data", f"{split.value}.bdld"), split)

    def load_direction(self, tag: str) -> BackdoorDirection:
        return load_direction(self.path("directions", f"{tag}.yaml"))

    def attack_set(self) -> Dataset:
        """The fixed test subset every attack and report row is measured on."""
        test = self.load_split(Split.TEST)
        limit = min(self.cfg.attacks.sample_limit, len(test))
        rng = np.random.default_rng(self.seed("attack-set"))
        return test.subset(np.sort(rng.choice(len(test), size=limit, replace=False)))

    def _timed(self, phase: str, body: Callable[[], None]) -> None:
        logger.info("Phase %s started (run dir %s)", phase, self.run_dir)
        started = time.perf_counter()
        body()
        self.manifest.timings[phase] = time.perf_counter() - started
        save_manifest(self.manifest, self.run_dir)
        logger.info("Phase %s finished in %.1fs", phase, self.manifest.timings[phase])

    def _attack_config(self, kind: str, epsilon: float, *labels) -> AttackConfig:
        attacks = self.cfg.attacks
        common = {
            "step_alpha": attacks.step_alpha,
            "init_eta": attacks.init_eta,
            "seed": self.seed("attack-init", *labels),
            "target_label": self.cfg.triggers.target_label,
        }
        if kind == "pgd":
            return AttackConfig.untargeted(epsilon, attacks.pgd_steps, **common)
        if kind == "tpgd":
            return AttackConfig.targeted(epsilon, attacks.pgd_steps, **common)
        return AttackConfig.feature_guided(epsilon, attacks.fga_steps, attacks.beta, **common)

    # ------------------------------------------------------------------ train

    def _make_splits(self) -> tuple[Dataset, Dataset, Dataset]:
        data = self.cfg.data
        if data.source == "synthetic":
            return synth_splits(
                data.num_classes, data.train_per_class, data.val_per_class,
                data.test_per_class, data.shape, self.seed("dataset"),
            )
        full = import_idx_dataset(data.idx_images, data.idx_labels, data.num_classes)
        order = np.random.default_rng(self.seed("split")).permutation(len(full))
        n_test = int(math.floor(data.test_fraction * len(full) + 0.5))
        n_val = int(math.floor(data.val_fraction * len(full) + 0.5))
        parts = (order[n_test + n_val :], order[n_test : n_test + n_val], order[:n_test])
        return tuple(  # type: ignore[return-value]
            Dataset(full.images[np.sort(p)], full.labels[np.sort(p)], full.num_classes, split)
            for p, split in zip(parts, (Split.TRAIN, Split.VAL, Split.TEST))
        )

    def _train_phase(self) -> None:
        splits = self._make_splits()
        for ds in splits:
            path = self.path("data", f"{ds.split.value}.bdld")
            save_dataset(ds, path)
            self._record(f"data:{ds.split.value}", path)
        train_set, val, _ = splits
        initial = build_preset(
            self.cfg.model.preset, train_set.sample_shape, train_set.num_classes,
            seed=self.seed("init"), precision=self.precision,
        )

        clean, history = train(
            initial, train_set, val, replace(self.cfg.training, seed=self.seed("train", "clean")),
            progress=self.progress,
        )
        self._save_network("clean", clean)
        self._write_csv("history:clean", to_history_frame(history), "histories", "clean.csv")

        for variant in self.variants():
            poisoned, plan = poison_dataset(
                train_set, variant.spec, variant.rate,
                self.seed("poison", variant.family, variant.rate),
            )
            data_path = self.path("data", f"poisoned_{variant.tag}.bdld")
            save_dataset(poisoned, data_path)
            self._record(f"data:poisoned_{variant.tag}", data_path)
            plan_path = self.path("data", f"poisoned_{variant.tag}.plan.yaml")
            save_plan(plan, plan_path)
            self._record(f"plan:{variant.tag}", plan_path)

            model, history = train(
                initial, poisoned, val,
                replace(self.cfg.training, seed=self.seed("train", variant.tag)),
                monitor_trigger=variant.spec, progress=self.progress,
            )
            self._save_network(f"backdoor_{variant.tag}", model)
            self._write_csv(
                f"history:backdoor_{variant.tag}", to_history_frame(history),
                "histories", f"backdoor_{variant.tag}.csv",
            )

    # ------------------------------------------------------------------ probe

    def _interpolation(self, label: str, net: Network, val: Dataset, direction) -> None:
        try:
            candidates = interpolation_candidates(net, val, direction.target_label)
        except EmptyEvaluationSetError as exc:
            warnings.warn(f"No interpolation samples for {label}: {exc}", UserWarning)
            return
        frame = to_interpolation_frame(interpolation_probe(net, candidates, direction))
        frame.insert(0, "model", label)
        self._write_csv(f"interpolation:{label}", frame, "probe", f"interpolation_{label}.csv")

    def _probe_phase(self) -> None:
        val = self.load_split(Split.VAL)
        clean = self.load_model("clean")
        rows = []
        for family in self.cfg.triggers.families:
            spec = self.cfg.triggers.spec(family)
            label = f"clean_{family}"
            try:
                direction = estimate_direction(clean, val, spec)
            except (DegenerateDirectionError, TooFewCleanSamplesError) as exc:
                warnings.warn(f"No {family} direction on the clean model: {exc}", UserWarning)
                continue
            save_direction(direction, self._record(
                f"direction:{label}", self.path("directions", f"{label}.yaml")))
            self._interpolation(label, clean, val, direction)

        for variant in self.variants():
            model = self.load_model(f"backdoor_{variant.tag}")
            direction = estimate_direction(model, val, variant.spec)
            save_direction(direction, self._record(
                f"direction:{variant.tag}", self.path("directions", f"{variant.tag}.yaml")))
            self._interpolation(variant.tag, model, val, direction)

            diagnostics = projection_diagnostics(model, val, variant.spec, direction)
            self._write_csv(
                f"projection:{variant.tag}", to_projection_frame(diagnostics),
                "probe", f"projection_{variant.tag}.csv",
            )
            projected, argmax = head_projection(model, direction)
            target = variant.spec.target_label
            rows.append(
                {
                    "model": variant.tag,
                    "trigger": variant.family,
                    "poison_rate": variant.rate,
                    "target_label": target,
                    "argmax": argmax,
                    "v_target": float(projected[target]),
                    "v_max_other": float(np.max(np.delete(projected, target))),
                    "positive_fraction": diagnostics.positive_fraction,
                }
            )
        self._write_csv("head_projection", pd.DataFrame(rows), "probe", "head_projection.csv")

    # ----------------------------------------------------------------- attack

    def _perceptual(
        self,
        variant: BackdoorVariant,
        attacked: Dataset,
        fga_runs: dict[float, BatchAttackResult],
    ) -> list[dict]:
        """Mean SSIM of triggered and FGA images against their clean sources."""
        pairs = [
            ("original_trigger", math.nan, attacked.images,
             apply_trigger(attacked.images, variant.spec)),
        ]
        pairs += [
            ("fga", eps, _originals(attacked, result), result.adversarial_images)
            for eps, result in fga_runs.items()
        ]
        rows = []
        for comparison, eps, clean, perturbed in pairs:
            try:
                value = mean_ssim(clean, perturbed)
            except ImageTooSmallError as exc:
                warnings.warn(f"SSIM skipped for {variant.tag}: {exc}", UserWarning)
                value = math.nan
            rows.append(
                {
                    "model": variant.tag,
                    "trigger": variant.family,
                    "poison_rate": variant.rate,
                    "comparison": comparison,
                    "epsilon": eps,
                    "ssim": value,
                }
            )
        return rows

    def _attack_phase(self) -> None:  # pylint: disable=R0914
        attacked = self.attack_set()
        attacks = self.cfg.attacks
        summary, perceptual = [], []
        for variant in self.variants():
            tag = variant.tag
            model = self.load_model(f"backdoor_{tag}")
            direction = self.load_direction(tag)
            base = {"model": tag, "trigger": variant.family, "poison_rate": variant.rate}

            pgd = batch_attack(
                model, attacked,
                self._attack_config("pgd", attacks.epsilons[0], tag, "pgd"),
                direction, self.threads, attacks.chunk_size, self.progress,
            )
            self._write_csv(f"attack:pgd_{tag}", to_batch_frame(pgd), "attacks", f"pgd_{tag}.csv")
            histogram = pd.DataFrame(
                {
                    "model": tag,
                    "label": np.arange(model.num_classes),
                    "count": label_distribution(pgd.outcomes, model.num_classes),
                    "misclassified_count": label_distribution(
                        pgd.outcomes, model.num_classes, misclassified_only=True
                    ),
                }
            )
            self._write_csv(
                f"histogram:{tag}", histogram, "attacks", f"label_histogram_{tag}.csv"
            )
            summary.append({**base, **_summary_row("pgd", attacks.epsilons[0], pgd)})

            fga_runs: dict[float, BatchAttackResult] = {}
            for eps in attacks.epsilons:
                for kind in ("tpgd", "fga"):
                    cfg = self._attack_config(kind, eps, tag, eps_tag(eps))
                    result = batch_attack(
                        model, attacked, cfg, direction, self.threads,
                        attacks.chunk_size, self.progress,
                    )
                    name = f"{kind}_{tag}_{eps_tag(eps)}"
                    self._write_csv(f"attack:{name}", to_batch_frame(result), "attacks",
                                    f"{name}.csv")
                    summary.append({**base, **_summary_row(kind, eps, result)})
                    if kind == "fga":
                        fga_runs[eps] = result

            curves = to_step_curve_frame({eps_tag(e): r for e, r in fga_runs.items()})
            curves.insert(0, "model", tag)
            self._write_csv(f"step_curve:{tag}", curves, "attacks", f"step_curve_{tag}.csv")

            sweep_cfg = self._attack_config(
                "fga", attacks.sweep_epsilon, tag, eps_tag(attacks.sweep_epsilon)
            )
            sweep = beta_sweep(
                model, attacked, sweep_cfg, direction, attacks.betas,
                self.threads, attacks.chunk_size,
            )
            sweep_frame = to_beta_sweep_frame(sweep)
            sweep_frame.insert(0, "model", tag)
            self._write_csv(f"beta_sweep:{tag}", sweep_frame, "attacks", f"beta_sweep_{tag}.csv")
            perceptual += self._perceptual(variant, attacked, fga_runs)

        self._write_csv("attack_summary", pd.DataFrame(summary), "attacks", "summary.csv")
        self._write_csv("perceptual", pd.DataFrame(perceptual), "attacks", "perceptual.csv")

    # ----------------------------------------------------------------- defend

    def _alternative_set(self, variant: BackdoorVariant, model: Network, train_set: Dataset):
        direction = self.load_direction(variant.tag)
        pool = train_set.where(train_set.labels != variant.spec.target_label)
        rng = np.random.default_rng(self.seed("alt-set", variant.tag))
        count = min(self.cfg.defenses.alt_samples, len(pool))
        source = pool.subset(np.sort(rng.choice(len(pool), size=count, replace=False)))
        eps = max(self.cfg.attacks.epsilons)
        result = batch_attack(
            model, source, self._attack_config("fga", eps, variant.tag, "alt-set"),
            direction, self.threads, self.cfg.attacks.chunk_size, self.progress,
        )
        adversarial = stamp_adversarial_set(result)
        path = self.path("defenses", f"alt_set_{variant.tag}.bdld")
        save_dataset(
            Dataset(adversarial.images, adversarial.labels, train_set.num_classes, Split.TRAIN),
            path,
        )
        self._record(f"alt_set:{variant.tag}", path)
        return adversarial

    def _defend_phase(self) -> None:
        train_set = self.load_split(Split.TRAIN)
        val = self.load_split(Split.VAL)
        teacher = self.load_model("clean")
        defenses, training = self.cfg.defenses, self.cfg.training
        for variant in self.variants():
            tag = variant.tag
            model = self.load_model(f"backdoor_{tag}")
            for defense in defenses.names:
                unlearn_cfg = UnlearnConfig(
                    epochs=0 if defense == "identity" else defenses.unlearn_epochs,
                    triggered_fraction=defenses.triggered_fraction,
                    batch_size=training.batch_size,
                    lr=defenses.lr,
                    momentum=training.momentum,
                    weight_decay=training.weight_decay,
                    seed=self.seed("defend", tag, defense),
                )
                if defense in ("identity", "unlearn"):
                    repaired, history = unlearn_trigger(
                        model, train_set, variant.spec, unlearn_cfg, val, self.progress
                    )
                elif defense == "alt_unlearn":
                    adversarial = self._alternative_set(variant, model, train_set)
                    repaired, history = unlearn_trigger(
                        model, train_set, adversarial, unlearn_cfg, val, self.progress
                    )
                else:
                    rng = np.random.default_rng(self.seed("distill-subset", tag))
                    count = max(1, round(defenses.distill_fraction * len(train_set)))
                    subset = train_set.subset(
                        np.sort(rng.choice(len(train_set), size=count, replace=False))
                    )
                    repaired, history = distill_repair(
                        model, teacher, subset,
                        DistillConfig(
                            lambda_attn=defenses.lambda_attn,
                            epochs=defenses.distill_epochs,
                            batch_size=training.batch_size,
                            lr=defenses.lr,
                            momentum=training.momentum,
                            weight_decay=training.weight_decay,
                            seed=self.seed("defend", tag, defense),
                        ),
                        val, self.progress,
                    )
                self._save_network(f"{defense}_{tag}", repaired)
                self._write_csv(
                    f"history:{defense}_{tag}", to_history_frame(history),
                    "histories", f"{defense}_{tag}.csv",
                )

    # ----------------------------------------------------------------- report

    def _backdoor_table(self, test: Dataset) -> pd.DataFrame:
        clean = self.load_model("clean")
        clean_acc = evaluate_accuracy(clean, test)
        rows = []
        for variant in self.variants():
            model = self.load_model(f"backdoor_{variant.tag}")
            rows.append(
                {
                    "model": variant.tag,
                    "trigger": variant.family,
                    "poison_rate": variant.rate,
                    "clean_acc": evaluate_accuracy(model, test),
                    "asr": attack_success_rate(model, test, variant.spec),
                    "clean_model_acc": clean_acc,
                    "clean_model_asr": attack_success_rate(clean, test, variant.spec),
                }
            )
        return pd.DataFrame(rows)

    def _report_phase(self) -> None:
        test = self.load_split(Split.TEST)
        val = self.load_split(Split.VAL)
        attacked = self.attack_set()
        self._write_csv("backdoor_table", self._backdoor_table(test), "reports", "backdoor.csv")

        rows: list[ReportRow] = []
        for variant in self.variants():
            tag = variant.tag
            before = self.load_model(f"backdoor_{tag}")
            direction = self.load_direction(tag)
            repaired = {d: self.load_model(f"{d}_{tag}") for d in self.cfg.defenses.names}
            for eps in self.cfg.attacks.epsilons:
                cfg = self._attack_config("fga", eps, tag, eps_tag(eps))
                before_result = batch_attack(
                    before, attacked, cfg, direction, self.threads, self.cfg.attacks.chunk_size
                )
                for defense, after in repaired.items():
                    rows.append(
                        repair_report(
                            before, after, attacked, variant.spec, direction, cfg,
                            defense, variant.rate, probe_set=val, threads=self.threads,
                            before_result=before_result, test_set=test,
                        )
                    )
        self._write_csv("repair_table", to_report_frame(rows), "reports", "repair.csv")
        for name, path in emit_figures(self.run_dir).items():
            self._record(f"figure:{name}", path)

    # ------------------------------------------------------------------ public

    def train(self) -> None:
        self._timed("train", self._train_phase)

    def probe(self) -> None:
        self._require("models", "clean.bdlm")
        self._timed("probe", self._probe_phase)

    def attack(self) -> None:
        self._require("models", "clean.bdlm")
        self._timed("attack", self._attack_phase)

    def defend(self) -> None:
        self._require("models", "clean.bdlm")
        self._timed("defend", self._defend_phase)

    def report(self) -> None:
        self._require("models", "clean.bdlm")
        self._timed("report", self._report_phase)

    def run(self) -> None:
        """All phases in order."""
        for phase in PHASES:
            getattr(self, phase)()

    def _require(self, *parts: str) -> None:
        path = self.path(*parts)
        if not path.is_file():
            raise MissingArtifactError(
                f"Missing artifact: {str(path)!r}; run the train phase first"
            )


def _originals(attacked: Dataset, result: BatchAttackResult) -> np.ndarray:
    """Clean images aligned with ``result.outcomes`` (which skip the target class)."""
    position = {int(i): k for k, i in enumerate(attacked.ids)}  # type: ignore[union-attr]
    return attacked.images[[position[int(i)] for i in result.sample_ids]]


def _summary_row(kind: str, epsilon: float, result: BatchAttackResult) -> dict:
    return {
        "kind": kind,
        "epsilon": epsilon,
        "success_rate": result.success_rate,
        "mean_alignment": result.mean_alignment,
        "n": len(result),
    }
