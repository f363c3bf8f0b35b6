"""Top-1 accuracy against positive statements, and agreement between rankers."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ConfigError


@dataclass
class EvalReport:
    num_images: int
    num_correct: int
    accuracy: float
    per_image: list[tuple[str, int, bool]] = field(default_factory=list)
    excluded: list[str] = field(default_factory=list)  # images without positives

    def summary(self) -> str:
        return f"accuracy {self.accuracy:.4f} ({self.num_correct}/{self.num_images})"


def accuracy(
    predictions: list[tuple[str, int]], gold: dict[str, set[int]]
) -> EvalReport:
    """An image is correct iff its top-ranked index is in its positive set.

    Images with an empty positive set are excluded from the denominator and
    listed in the report.
    """
    per_image = []
    excluded = []
    correct = 0
    counted = 0
    for image_id, top in predictions:
        if image_id not in gold:
            raise ConfigError(f"unknown image id {image_id!r}")
        positives = gold[image_id]
        if not positives:
            excluded.append(image_id)
            continue
        ok = top in positives
        counted += 1
        correct += ok
        per_image.append((image_id, top, ok))
    acc = correct / counted if counted else 0.0
    return EvalReport(
        num_images=counted,
        num_correct=correct,
        accuracy=acc,
        per_image=per_image,
        excluded=excluded,
    )


def agreement(ranker_a_tops: list[int], ranker_b_tops: list[int]) -> float:
    """Fraction of images where both rankers pick the same top statement."""
    if len(ranker_a_tops) != len(ranker_b_tops):
        raise ConfigError(
            f"top lists differ in length: {len(ranker_a_tops)} vs {len(ranker_b_tops)}"
        )
    if not ranker_a_tops:
        return 1.0
    same = sum(a == b for a, b in zip(ranker_a_tops, ranker_b_tops))
    return same / len(ranker_a_tops)
