# src/galgeo/utils/sampling.py
import logging
from typing import List, Optional, Sequence

import numpy as np

from src.galgeo.base import EvaluationDomainError, SamplingExhaustedError
from src.galgeo.config import settings
from src.galgeo.symbolic.expr import ChartPoint, Expression

logger = logging.getLogger(__name__)


def sample_points(
    expressions: Sequence[Expression],
    n: int,
    count: int,
    seed: Optional[int] = None,
    box: Optional[float] = None,
    max_rejections: Optional[int] = None,
) -> List[ChartPoint]:
    """Uniform points in the box |t|, |x|, |y| <= box where every expression evaluates.

    Deterministic for a given seed. Raises SamplingExhaustedError after
    `max_rejections` rejected draws.
    """
    seed = settings.check_seed if seed is None else seed
    box = settings.sample_box if box is None else box
    max_rejections = settings.max_rejections if max_rejections is None else max_rejections

    rng = np.random.default_rng(seed)
    points: List[ChartPoint] = []
    rejections = 0
    while len(points) < count:
        point = ChartPoint.from_array(rng.uniform(-box, box, 2 * n + 1), n)
        try:
            for expression in expressions:
                expression.evaluate(point)
        except EvaluationDomainError as exc:
            rejections += 1
            logger.debug("rejected sample point: %s", exc)
            if rejections > max_rejections:
                raise SamplingExhaustedError(
                    f"gave up after {rejections} rejected points ({len(points)} of {count} accepted)"
                ) from None
            continue
        points.append(point)
    if rejections:
        logger.info("rejected %d points outside the expression domain", rejections)
    return points
