"""User population: two identity groups with group-conditioned topic preferences.

Every user belongs to either the majority or the minority group and carries a
3-entry preference vector z over the topics (professional, mainstream,
marginal), drawn from a group-dependent normal distribution. Raw z values are
kept as-is for distance computations; wherever a probability is needed they
are clamped below at CLAMP_EPS and renormalized to a categorical distribution.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from .errors import ConfigError

# Floor applied to preference entries before normalizing to probabilities.
CLAMP_EPS = 1e-6

N_TOPICS = 3
TOPIC_NAMES = ("professional", "mainstream", "marginal")


class Group(IntEnum):
    MAJORITY = 0
    MINORITY = 1


class Topic(IntEnum):
    PROFESSIONAL = 0
    MAINSTREAM = 1
    MARGINAL = 2


GROUP_NAMES = {Group.MAJORITY: "majority", Group.MINORITY: "minority"}
GROUP_BY_NAME = {v: k for k, v in GROUP_NAMES.items()}


@dataclass(frozen=True)
class GroupPreferencePrior:
    """Mean preference per topic plus a shared standard deviation."""

    mu: tuple[float, float, float]
    sigma: float

    def validate(self, path: str = "prior") -> None:
        if len(self.mu) != N_TOPICS:
            raise ConfigError(f"{path}.mu: expected {N_TOPICS} entries, got {len(self.mu)}")
        if not all(np.isfinite(self.mu)):
            raise ConfigError(f"{path}.mu: entries must be finite")
        if not (np.isfinite(self.sigma) and self.sigma > 0):
            raise ConfigError(f"{path}.sigma: must be a positive finite number")


# Default priors: shared professional interest, mirrored mainstream/marginal.
DEFAULT_PRIORS = {
    Group.MAJORITY: GroupPreferencePrior(mu=(0.5, 0.4, 0.1), sigma=0.1),
    Group.MINORITY: GroupPreferencePrior(mu=(0.5, 0.1, 0.4), sigma=0.1),
}


@dataclass(frozen=True)
class PopulationConfig:
    n: int = 1000
    minority_share: float = 0.2
    priors: dict[Group, GroupPreferencePrior] = field(
        default_factory=lambda: dict(DEFAULT_PRIORS)
    )

    @property
    def minority_count(self) -> int:
        return int(np.floor(self.n * self.minority_share))

    def validate(self) -> None:
        if self.n < 2:
            raise ConfigError(f"population.n: must be >= 2, got {self.n}")
        if not (0.0 <= self.minority_share < 1.0):
            raise ConfigError(
                f"population.minority_share: must be in [0, 1), got {self.minority_share}"
            )
        m = self.minority_count
        if m < 1:
            raise ConfigError(
                f"population.minority_share: floor(n * share) must be >= 1, "
                f"got {m} for n={self.n}, share={self.minority_share}"
            )
        if self.n - m < m:
            raise ConfigError(
                f"population.minority_share: majority count ({self.n - m}) must be "
                f">= minority count ({m})"
            )
        for group in (Group.MAJORITY, Group.MINORITY):
            if group not in self.priors:
                raise ConfigError(f"population.priors: missing prior for {GROUP_NAMES[group]}")
            self.priors[group].validate(path=f"population.priors.{GROUP_NAMES[group]}")


@dataclass(frozen=True)
class UserProfile:
    user_id: int
    group: Group
    z: np.ndarray  # raw 3-entry preference vector


@dataclass(frozen=True)
class Population:
    """Immutable population: group labels and raw preference vectors by user id."""

    groups: np.ndarray  # int8, shape (n,), Group values
    z: np.ndarray  # float64, shape (n, 3)

    def __post_init__(self):
        self.groups.setflags(write=False)
        self.z.setflags(write=False)

    @property
    def n(self) -> int:
        return len(self.groups)

    @property
    def minority_count(self) -> int:
        return int(np.sum(self.groups == Group.MINORITY))

    @property
    def majority_count(self) -> int:
        return self.n - self.minority_count

    def group_ids(self, group: Group) -> np.ndarray:
        return np.flatnonzero(self.groups == group)

    def group_size(self, group: Group) -> int:
        return int(np.sum(self.groups == group))

    def user(self, user_id: int) -> UserProfile:
        return UserProfile(user_id, Group(int(self.groups[user_id])), self.z[user_id])

    @property
    def users(self) -> list[UserProfile]:
        return [self.user(i) for i in range(self.n)]

    def normalized_z(self) -> np.ndarray:
        """Clamp-normalized preference matrix, one categorical row per user."""
        return normalized_preferences(self.z)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["user_id", "group", "z_professional", "z_mainstream", "z_marginal"])
            for i in range(self.n):
                w.writerow(
                    [i, GROUP_NAMES[Group(int(self.groups[i]))]]
                    + [repr(float(v)) for v in self.z[i]]
                )

    @classmethod
    def read_csv(cls, path) -> "Population":
        groups, zs = [], []
        with open(path, newline="", encoding="utf-8") as f:
            r = csv.reader(f)
            header = next(r)
            expected = ["user_id", "group", "z_professional", "z_mainstream", "z_marginal"]
            if header != expected:
                raise ConfigError(f"population csv: bad header {header!r}")
            for row in r:
                groups.append(GROUP_BY_NAME[row[1]])
                zs.append([float(v) for v in row[2:5]])
        return cls(groups=np.array(groups, dtype=np.int8), z=np.array(zs, dtype=np.float64))


def sample_population(config: PopulationConfig, rng: np.random.Generator) -> Population:
    """Draw a population from the group priors.

    The first floor(n * minority_share) ids are minority, the rest majority, so
    group sizes are exact for any seed. Preference entries are i.i.d. normal
    draws around the user's group mean.
    """
    config.validate()
    n, m = config.n, config.minority_count
    z = np.empty((n, N_TOPICS), dtype=np.float64)
    min_prior = config.priors[Group.MINORITY]
    maj_prior = config.priors[Group.MAJORITY]
    z[:m] = rng.normal(min_prior.mu, min_prior.sigma, size=(m, N_TOPICS))
    z[m:] = rng.normal(maj_prior.mu, maj_prior.sigma, size=(n - m, N_TOPICS))
    groups = np.full(n, Group.MAJORITY, dtype=np.int8)
    groups[:m] = Group.MINORITY
    return Population(groups=groups, z=z)


def normalized_preferences(z: np.ndarray) -> np.ndarray:
    """Turn raw preferences into a categorical distribution.

    Entries are clamped below at CLAMP_EPS, then divided by their sum. Works on
    a single 3-vector or on an (n, 3) matrix row-wise.
    """
    z = np.asarray(z, dtype=np.float64)
    clamped = np.maximum(z, CLAMP_EPS)
    return clamped / clamped.sum(axis=-1, keepdims=True)
