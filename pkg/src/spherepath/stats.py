"""Sign, runs and linear rank statistics of a :class:`SignRankProfile`."""

import numpy as np

from .errors import ScoreSymmetryError
from .model import ScoreFunction, SignRankProfile


def sign_statistic(profile: SignRankProfile) -> int:
    return int(profile.S.sum())


def runs_statistic(profile: SignRankProfile) -> int:
    along = profile.signs_along_path
    return 1 + int(np.count_nonzero(along[1:] != along[:-1]))


def linear_rank_statistic(
    profile: SignRankProfile, scores: ScoreFunction, allow_asymmetric: bool = False
) -> float:
    """``sum_i S[Pi_i] * a(i)``.

    Asymmetric scores make the value depend on the path orientation, so they
    are refused unless ``allow_asymmetric`` is set.
    """
    if scores.n != profile.n:
        raise ValueError(f"need {profile.n} scores, got {scores.n}")
    if not scores.symmetric and not allow_asymmetric:
        raise ScoreSymmetryError(
            "scores with a(i) != a(n+1-i) depend on the path direction; "
            "pass allow_asymmetric=True to override"
        )
    return float(profile.signs_along_path @ scores.a)


def combined_sign(t_inner: int, t_diag: int) -> int:
    return max(int(t_inner), int(t_diag))


def combined_runs(t_inner: int, t_diag: int) -> int:
    return min(int(t_inner), int(t_diag))
