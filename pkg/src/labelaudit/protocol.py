"""The two audit protocols: seeded exclusive splits, ordered training
curricula, prefix learning curves, and gap-based verdicts.

Identify (protocol A): are test-set labels consistent with the training
set? Three exclusive subsets of size x are drawn from the training set;
one becomes the new test set, the others are arranged with the original
test set into three curricula:

    TrainTest = [blue, original test]
    PureTrain = [green, blue]
    TestTrain = [original test, blue]

If the original test set follows the same codebook, its sentences are as
predictive of the new test set as training sentences are, and the three
learning curves coincide; a depressed TestTrain start is the signature of
inconsistency.

Validate (protocol B): after correcting z of the y+z test sentences, the
corrected subset should behave like training data while the original
mistake subset should not. Eight curricula interleave the good test
subset Test(y), two training subsets Train_y2 and Train_w, and the
mistake or corrected subset M/C(z); every curriculum holds y+w+z
sentences and is evaluated on a third training subset Train_x.

A "curve" retrains from scratch on each checkpoint prefix of the ordered
curriculum, so every point is independently reproducible and the order
effect shows up as prefix composition. Per-point training seeds derive
from (plan seed, checkpoint index), which keeps results identical no
matter how points are scheduled across workers and lets arms at the same
checkpoint share their random numbers (see run_curve).
"""
from __future__ import annotations

import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .corpus import Dataset
from .crf import TrainConfig
from .errors import DataError
from .evaluation import EvalResult, evaluate_model
from .features import DEFAULT_TEMPLATES, extract_features
from .training import train
from .util import derive_seed

DEFAULT_THRESHOLD = 0.02  # 2 F1 points
DEFAULT_N_CHECKPOINTS = 10

IDENTIFY_ARMS = ("TrainTest", "PureTrain", "TestTrain")
VALIDATE_ARMS = (
    "TestTrainMistake", "TestTrainCorrect",
    "PureTrainMistake", "PureTrainCorrect",
    "MistakeTestTrain", "CorrectTestTrain",
    "MistakePureTrain", "CorrectPureTrain",
)
# Mistake arm, Correct arm, and the all-training analogue of the Correct
# arm (itself, for the two arms that contain no good-test segment).
VALIDATE_ORDERINGS = (
    ("TestTrainMistake", "TestTrainCorrect", "PureTrainCorrect"),
    ("PureTrainMistake", "PureTrainCorrect", "PureTrainCorrect"),
    ("MistakeTestTrain", "CorrectTestTrain", "CorrectPureTrain"),
    ("MistakePureTrain", "CorrectPureTrain", "CorrectPureTrain"),
)


@dataclass(frozen=True)
class Segment:
    """A named slice of a source dataset inside a curriculum."""

    label: str
    source: str
    indices: tuple[int, ...]


@dataclass(frozen=True)
class Curriculum:
    """An ordered training set built by concatenating segments."""

    name: str
    segments: tuple[Segment, ...]

    @property
    def size(self) -> int:
        return sum(len(s.indices) for s in self.segments)

    def sentences(self, sources: Mapping[str, Dataset]) -> list:
        out = []
        for seg in self.segments:
            source = sources[seg.source]
            out.extend(source.sentences[i] for i in seg.indices)
        return out


@dataclass(frozen=True)
class IdentifyPlan:
    """Exclusive subsets behind protocol A, all drawn from the training set."""

    x: int
    seed: int
    new_test: tuple[int, ...]
    blue: tuple[int, ...]
    green: tuple[int, ...]
    external_set: tuple[int, ...]  # the original test set, by index


@dataclass(frozen=True)
class ValidatePlan:
    """Subsets behind protocol B."""

    x: int
    y: int
    z: int
    w: int
    seed: int
    train_x: tuple[int, ...]
    train_y2: tuple[int, ...]
    train_w: tuple[int, ...]
    test_y: tuple[int, ...]
    mistake_z: tuple[int, ...]
    correct_z: tuple[int, ...]


@dataclass(frozen=True)
class CurvePoint:
    prefix_size: int
    result: EvalResult


@dataclass(frozen=True)
class LearningCurve:
    arm: str
    seed: int
    points: tuple[CurvePoint, ...]

    def f1_at(self, prefix_size: int) -> float:
        for point in self.points:
            if point.prefix_size == prefix_size:
                return point.result.f1
        raise KeyError(f"no checkpoint at prefix size {prefix_size}")


@dataclass(frozen=True)
class GapStat:
    """Across-seed aggregate of an F1 difference at one checkpoint."""

    checkpoint: int
    mean: float
    lo: float
    hi: float


@dataclass(frozen=True)
class AuditReport:
    """Everything a protocol run produced, sufficient to recompute its
    own verdict."""

    protocol: str
    seeds: tuple[int, ...]
    threshold: float
    early_window: tuple[int, ...]
    curves: tuple[LearningCurve, ...]
    gap_stats: Mapping[str, tuple[GapStat, ...]]
    verdict: str
    sizes: Mapping[str, int] = field(default_factory=dict)


def make_identify_plan(train_set: Dataset, test_set: Dataset, x: int,
                       seed: int) -> IdentifyPlan:
    """Shuffle training indices with the seeded generator and cut three
    consecutive blocks of size x: new test, blue, green."""
    if x < 1:
        raise DataError("x must be >= 1")
    if 3 * x > len(train_set):
        raise DataError(
            f"3*x = {3 * x} exceeds the training set size {len(train_set)}; "
            f"maximum feasible x is {len(train_set) // 3}")
    if x > len(test_set):
        warnings.warn(f"x = {x} exceeds the test set size {len(test_set)}; "
                      f"the paper-matching choice is x <= |test|",
                      stacklevel=2)
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(train_set))
    # The test segment is fed in a seeded order as well: early curve
    # prefixes then sample the test set differently per seed instead of
    # inheriting the file order's coverage luck at every seed.
    test_order = rng.permutation(len(test_set))
    return IdentifyPlan(
        x=x,
        seed=seed,
        new_test=tuple(int(i) for i in order[:x]),
        blue=tuple(int(i) for i in order[x:2 * x]),
        green=tuple(int(i) for i in order[2 * x:3 * x]),
        external_set=tuple(int(i) for i in test_order),
    )


def build_identify_curricula(plan: IdentifyPlan) -> tuple[Curriculum, ...]:
    """The three orderings of protocol A."""
    blue = Segment("blue", "train", plan.blue)
    green = Segment("green", "train", plan.green)
    test = Segment("test", "test", plan.external_set)
    return (
        Curriculum("TrainTest", (blue, test)),
        Curriculum("PureTrain", (green, blue)),
        Curriculum("TestTrain", (test, blue)),
    )


def make_validate_plan(train_set: Dataset, test_good: Dataset,
                       test_mistake: Dataset, test_corrected: Dataset,
                       x: int, y: int, z: int, w: int,
                       seed: int) -> ValidatePlan:
    """Seeded exclusive sampling of Train_x, Train_y2, Train_w."""
    if len(test_good) != y:
        raise DataError(f"test_good has {len(test_good)} sentences, "
                        f"expected y = {y}")
    if len(test_mistake) != z:
        raise DataError(f"test_mistake has {len(test_mistake)} sentences, "
                        f"expected z = {z}")
    if len(test_corrected) != z:
        raise DataError(f"test_corrected has {len(test_corrected)} "
                        f"sentences, expected z = {z}")
    for i, (m, c) in enumerate(zip(test_mistake.sentences,
                                   test_corrected.sentences)):
        if m.texts != c.texts:
            raise DataError(f"mistake/corrected sentence {i} tokens differ; "
                            "the two sets must be aligned")
    if x + y + w > len(train_set):
        raise DataError(f"x + y + w = {x + y + w} exceeds the training set "
                        f"size {len(train_set)}")
    if min(x, w) < 1 or y < 0 or z < 0:
        raise DataError("sizes must be positive (y and z may be 0)")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(train_set))
    # Seeded within-segment order for the test parts; mistake and
    # corrected share one permutation so they stay sentence-aligned and
    # the Correct curricula differ from Mistake ones only in labels.
    order_y = rng.permutation(len(test_good))
    order_z = rng.permutation(len(test_mistake))
    return ValidatePlan(
        x=x, y=y, z=z, w=w, seed=seed,
        train_x=tuple(int(i) for i in order[:x]),
        train_y2=tuple(int(i) for i in order[x:x + y]),
        train_w=tuple(int(i) for i in order[x + y:x + y + w]),
        test_y=tuple(int(i) for i in order_y),
        mistake_z=tuple(int(i) for i in order_z),
        correct_z=tuple(int(i) for i in order_z),
    )


def build_validate_curricula(plan: ValidatePlan) -> tuple[Curriculum, ...]:
    """The eight orderings of protocol B, each of size y + w + z."""
    test_y = Segment("test_y", "test_good", plan.test_y)
    train_y2 = Segment("train_y2", "train", plan.train_y2)
    train_w = Segment("train_w", "train", plan.train_w)
    mistake = Segment("mistake_z", "test_mistake", plan.mistake_z)
    correct = Segment("correct_z", "test_corrected", plan.correct_z)
    return (
        Curriculum("TestTrainMistake", (test_y, train_w, mistake)),
        Curriculum("TestTrainCorrect", (test_y, train_w, correct)),
        Curriculum("PureTrainMistake", (train_y2, train_w, mistake)),
        Curriculum("PureTrainCorrect", (train_y2, train_w, correct)),
        Curriculum("MistakeTestTrain", (mistake, test_y, train_w)),
        Curriculum("CorrectTestTrain", (correct, test_y, train_w)),
        Curriculum("MistakePureTrain", (mistake, train_y2, train_w)),
        Curriculum("CorrectPureTrain", (correct, train_y2, train_w)),
    )


def default_checkpoints(size: int,
                        n_checkpoints: int = DEFAULT_N_CHECKPOINTS,
                        ) -> list[int]:
    """Evenly spaced prefix sizes ending at `size`."""
    ticks = sorted({max(1, round(size * k / n_checkpoints))
                    for k in range(1, n_checkpoints + 1)})
    return ticks


def fit_checkpoints(checkpoints: Sequence[int], size: int) -> list[int]:
    """Clip a shared checkpoint grid to one arm: drop ticks beyond the
    curriculum and make the last tick the full curriculum size."""
    kept = sorted({k for k in checkpoints if 1 <= k < size})
    return kept + [size]


def run_curve(curriculum: Curriculum, sources: Mapping[str, Dataset],
              new_test: Dataset, checkpoints: Sequence[int],
              train_config: TrainConfig,
              templates: Sequence[str] = DEFAULT_TEMPLATES,
              master_seed: int | None = None,
              continual: bool = False) -> LearningCurve:
    """Learning curve of one curriculum: for each checkpoint k, train on
    the first k curriculum sentences and evaluate on new_test.

    Each point trains from scratch (the default) so points are
    order-comparable and independently reproducible; `continual` instead
    warm-starts each point from the previous one, for fidelity comparison
    with streamed feeding. The training seed of a point derives from
    (master seed, checkpoint index) alone: results never depend on worker
    scheduling, identical curricula (the validate protocol's z = 0 case)
    train identically, and arms being compared share their random numbers
    at each checkpoint, which cancels optimizer-path noise out of the
    gap statistics. master_seed defaults to train_config.seed.
    """
    checkpoints = list(checkpoints)
    if not checkpoints:
        raise DataError("at least one checkpoint is required")
    if any(b <= a for a, b in zip(checkpoints, checkpoints[1:])):
        raise DataError("checkpoints must be strictly increasing")
    if checkpoints[-1] != curriculum.size:
        raise DataError(f"last checkpoint must equal the curriculum size "
                        f"{curriculum.size}, got {checkpoints[-1]}")
    if master_seed is None:
        master_seed = train_config.seed

    ordered = curriculum.sentences(sources)
    raw = [extract_features(s.texts, templates) for s in ordered]
    test_raw = [extract_features(s.texts, templates)
                for s in new_test.sentences]

    points = []
    if continual:
        points = _run_curve_continual(curriculum, ordered, raw, new_test,
                                      test_raw, checkpoints, train_config,
                                      templates, master_seed)
    else:
        for ci, k in enumerate(checkpoints):
            config = _point_config(train_config, master_seed, ci)
            prefix = Dataset(tuple(ordered[:k]), curriculum.name)
            model = train(prefix, templates, config, raw_features=raw[:k])
            rows_cache = [model.feature_index.rows_for(s.texts, r)
                          for s, r in zip(new_test.sentences, test_raw)]
            result = evaluate_model(model, new_test, rows_cache)
            points.append(CurvePoint(k, result))
    return LearningCurve(curriculum.name, master_seed, tuple(points))


def _point_config(config: TrainConfig, master_seed: int,
                  checkpoint_index: int) -> TrainConfig:
    seed = derive_seed(master_seed, checkpoint_index)
    return TrainConfig(epochs=config.epochs,
                       learning_rate=config.learning_rate, l2=config.l2,
                       epsilon=config.epsilon, seed=seed,
                       shuffle=config.shuffle, min_count=config.min_count,
                       full_batch=config.full_batch)


def _run_curve_continual(curriculum, ordered, raw, new_test, test_raw,
                         checkpoints, train_config, templates, master_seed):
    """Warm-start mode: each checkpoint continues training the previous
    model on the new slice only. The feature dictionary is fixed up front
    from the full curriculum so weights stay index-compatible."""
    from .crf import blank_model
    from .features import build_features
    from .training import _Adagrad, _compile_sentences, _sentence_stats

    full = Dataset(tuple(ordered), curriculum.name)
    config = _point_config(train_config, master_seed, 0)
    index = build_features(full, templates, config.min_count, raw)
    model = blank_model(index, config)
    compiled = _compile_sentences(full, model, raw)
    opt_em = _Adagrad(model.w_emission.shape, config.learning_rate,
                      config.epsilon)
    opt_tr = _Adagrad(model.w_transition.shape, config.learning_rate,
                      config.epsilon)
    g_em = np.empty_like(model.w_emission)
    g_tr = np.empty_like(model.w_transition)

    points = []
    prev = 0
    for ci, k in enumerate(checkpoints):
        rng = np.random.default_rng(derive_seed(master_seed, ci))
        for _ in range(config.epochs):
            chunk = np.arange(prev, k)
            if config.shuffle:
                chunk = rng.permutation(chunk)
            for si in chunk:
                item = compiled[si]
                _, grad_unique, grad_tr = _sentence_stats(
                    model.w_emission, model.w_transition, item)
                np.multiply(model.w_emission, -config.l2, out=g_em)
                g_em[item.unique_rows] += grad_unique
                opt_em.step(model.w_emission, g_em)
                np.multiply(model.w_transition, -config.l2, out=g_tr)
                g_tr += grad_tr
                opt_tr.step(model.w_transition, g_tr)
        prev = k
        rows_cache = [model.feature_index.rows_for(s.texts, r)
                      for s, r in zip(new_test.sentences, test_raw)]
        points.append(CurvePoint(k, evaluate_model(model, new_test,
                                                   rows_cache)))
    return points


def _curve_task(args) -> tuple[tuple[int, str], LearningCurve]:
    (key, curriculum, sources, new_test, checkpoints, train_config,
     templates, master_seed, continual) = args
    curve = run_curve(curriculum, sources, new_test, checkpoints,
                      train_config, templates, master_seed, continual)
    return key, curve


def _run_arms(tasks: list, jobs: int) -> dict[tuple[int, str], LearningCurve]:
    """Run curve tasks, optionally across processes. Results are keyed, so
    scheduling never changes the report."""
    results: dict[tuple[int, str], LearningCurve] = {}
    if jobs <= 1 or len(tasks) <= 1:
        for task in tasks:
            key, curve = _curve_task(task)
            results[key] = curve
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for key, curve in pool.map(_curve_task, tasks):
                results[key] = curve
    return results


EARLY_WINDOW_KEY = ":early-window"
# sentinel checkpoint for the window-aggregated stat
WINDOW_CHECKPOINT = 0


def _gap_stats(curves: Mapping[tuple[int, str], LearningCurve],
               seeds: Sequence[int], pair: tuple[str, str],
               checkpoints: Sequence[int]) -> tuple[GapStat, ...]:
    """Across-seed stats of F1(first arm) - F1(second arm) per checkpoint."""
    stats = []
    for k in checkpoints:
        gaps = [curves[(seed, pair[0])].f1_at(k)
                - curves[(seed, pair[1])].f1_at(k) for seed in seeds]
        stats.append(GapStat(k, float(np.mean(gaps)), float(np.min(gaps)),
                             float(np.max(gaps))))
    return tuple(stats)


def _window_stat(curves: Mapping[tuple[int, str], LearningCurve],
                 seeds: Sequence[int], pair: tuple[str, str],
                 window: Sequence[int]) -> GapStat:
    """One per-seed gap averaged over the early window, aggregated across
    seeds. Checkpoint 0 marks it as the window aggregate."""
    per_seed = []
    for seed in seeds:
        gaps = [curves[(seed, pair[0])].f1_at(k)
                - curves[(seed, pair[1])].f1_at(k) for k in window]
        per_seed.append(float(np.mean(gaps)))
    return GapStat(WINDOW_CHECKPOINT, float(np.mean(per_seed)),
                   float(np.min(per_seed)), float(np.max(per_seed)))


def identify_verdict(gap_stats: Mapping[str, tuple[GapStat, ...]],
                     threshold: float,
                     early_window: Sequence[int]) -> str:
    """Pure verdict rule for protocol A.

    inconsistent: the PureTrain-TestTrain mean gap exceeds the threshold
    at every early-window checkpoint, and every single seed shows a
    positive gap on average over that window (the ':early-window' stat's
    across-seed minimum). consistent: every arm pair's window-averaged
    mean gap is within the threshold. Anything else: indeterminate.

    Per-checkpoint single-seed values are noisy, which is why the two
    auxiliary conditions read the window aggregate rather than demanding
    every (seed, checkpoint) cell behave.
    """
    early = set(early_window)
    primary = [g for g in gap_stats["PureTrain-TestTrain"]
               if g.checkpoint in early]
    primary_window = gap_stats["PureTrain-TestTrain" + EARLY_WINDOW_KEY][0]
    if primary and primary_window.lo > 0 and \
            all(g.mean > threshold for g in primary):
        return "inconsistent"
    all_small = all(
        abs(stats[0].mean) <= threshold
        for name, stats in gap_stats.items()
        if name.endswith(EARLY_WINDOW_KEY))
    if all_small:
        return "consistent"
    return "indeterminate"


def validate_verdict(gap_stats: Mapping[str, tuple[GapStat, ...]],
                     threshold: float, z: int) -> str:
    """Pure verdict rule for protocol B.

    recovered: every Correct-minus-Mistake final gap exceeds the threshold
    while every Correct arm sits within the threshold band of its
    all-training analogue. A z of 0 is trivially recovered. Anything that
    is neither fully recovered nor clearly unrecovered is indeterminate.
    """
    if z == 0:
        return "recovered"
    mistake_gaps = [stats[-1].mean for name, stats in gap_stats.items()
                    if name.startswith("correct_minus_mistake:")]
    band_gaps = [stats[-1].mean for name, stats in gap_stats.items()
                 if name.startswith("correct_vs_analogue:")]
    hurt = all(g > threshold for g in mistake_gaps)
    comparable = all(abs(g) <= threshold for g in band_gaps)
    if hurt and comparable:
        return "recovered"
    if not hurt and comparable:
        return "not-recovered"
    return "indeterminate"


def run_identify(train_set: Dataset, test_set: Dataset, x: int,
                 seeds: Sequence[int], checkpoints: Sequence[int] | None,
                 train_config: TrainConfig,
                 templates: Sequence[str] = DEFAULT_TEMPLATES,
                 threshold: float = DEFAULT_THRESHOLD,
                 jobs: int = 1) -> AuditReport:
    """Protocol A end to end: plans, three curves per seed, gap stats,
    and the inconsistency verdict over the early-stage window (the first
    half of the checkpoints shared by all arms)."""
    seeds = tuple(int(s) for s in seeds)
    if not seeds:
        raise DataError("at least one seed is required")
    tasks = []
    arm_checkpoints: dict[str, list[int]] = {}
    for seed in seeds:
        plan = make_identify_plan(train_set, test_set, x, seed)
        curricula = build_identify_curricula(plan)
        new_test = train_set.subset(plan.new_test, "new_test")
        sources = {"train": train_set, "test": test_set}
        base = (list(checkpoints) if checkpoints is not None
                else default_checkpoints(min(c.size for c in curricula)))
        for cur in curricula:
            cks = fit_checkpoints(base, cur.size)
            arm_checkpoints[cur.name] = cks
            tasks.append(((seed, cur.name), cur, sources, new_test, cks,
                          train_config, templates, seed, False))
    curves = _run_arms(tasks, jobs)

    common = sorted(set.intersection(
        *(set(c) for c in arm_checkpoints.values())))
    early = tuple(common[:max(1, len(common) // 2)])
    pairs = [("PureTrain", "TestTrain"), ("PureTrain", "TrainTest"),
             ("TrainTest", "TestTrain")]
    gap_stats = {}
    for a, b in pairs:
        gap_stats[f"{a}-{b}"] = _gap_stats(curves, seeds, (a, b), common)
        gap_stats[f"{a}-{b}{EARLY_WINDOW_KEY}"] = (
            _window_stat(curves, seeds, (a, b), early),)
    verdict = identify_verdict(gap_stats, threshold, early)
    ordered_curves = tuple(curves[(seed, arm)] for seed in seeds
                           for arm in IDENTIFY_ARMS)
    return AuditReport(
        protocol="identify", seeds=seeds, threshold=threshold,
        early_window=early, curves=ordered_curves,
        gap_stats=gap_stats, verdict=verdict,
        sizes={"train": len(train_set), "test": len(test_set), "x": x},
    )


def run_validate(train_set: Dataset, test_good: Dataset,
                 test_mistake: Dataset, test_corrected: Dataset,
                 x: int, y: int, z: int, w: int,
                 seeds: Sequence[int], checkpoints: Sequence[int] | None,
                 train_config: TrainConfig,
                 templates: Sequence[str] = DEFAULT_TEMPLATES,
                 threshold: float = DEFAULT_THRESHOLD,
                 jobs: int = 1) -> AuditReport:
    """Protocol B end to end: eight curves per seed, the
    Correct-versus-Mistake and Correct-versus-analogue final gaps, and
    the recovery verdict."""
    seeds = tuple(int(s) for s in seeds)
    if not seeds:
        raise DataError("at least one seed is required")
    if z == 0:
        warnings.warn("z = 0: Mistake and Correct curricula are identical, "
                      "all gaps are zero and the verdict is trivially "
                      "'recovered'", stacklevel=2)
    tasks = []
    cks: list[int] = []
    for seed in seeds:
        plan = make_validate_plan(train_set, test_good, test_mistake,
                                  test_corrected, x, y, z, w, seed)
        curricula = build_validate_curricula(plan)
        new_test = train_set.subset(plan.train_x, "new_test")
        sources = {"train": train_set, "test_good": test_good,
                   "test_mistake": test_mistake,
                   "test_corrected": test_corrected}
        size = curricula[0].size
        base = (list(checkpoints) if checkpoints is not None
                else default_checkpoints(size))
        cks = fit_checkpoints(base, size)
        for cur in curricula:
            tasks.append(((seed, cur.name), cur, sources, new_test, cks,
                          train_config, templates, seed, False))
    curves = _run_arms(tasks, jobs)

    gap_stats: dict[str, tuple[GapStat, ...]] = {}
    for mistake_arm, correct_arm, analogue_arm in VALIDATE_ORDERINGS:
        gap_stats[f"correct_minus_mistake:{mistake_arm}"] = _gap_stats(
            curves, seeds, (correct_arm, mistake_arm), cks)
        if analogue_arm != correct_arm:
            gap_stats[f"correct_vs_analogue:{correct_arm}"] = _gap_stats(
                curves, seeds, (correct_arm, analogue_arm), cks)
    verdict = validate_verdict(gap_stats, threshold, z)
    ordered_curves = tuple(curves[(seed, arm)] for seed in seeds
                           for arm in VALIDATE_ARMS)
    return AuditReport(
        protocol="validate", seeds=seeds, threshold=threshold,
        early_window=tuple(cks[:max(1, len(cks) // 2)]),
        curves=ordered_curves, gap_stats=gap_stats, verdict=verdict,
        sizes={"train": len(train_set), "x": x, "y": y, "z": z, "w": w},
    )
