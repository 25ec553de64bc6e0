"""Per-environment yield ranking and the cross-environment intersection.

A configuration counts as resilient when it ranks inside the top K for
predicted yield in every environment and survives the prediction-
confidence filter everywhere. Environments are location x scenario x
climate-variant cells; the table must cover the full grid.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import InputError

DEFAULT_TARGET = "GrainTotalWt"


@dataclass(frozen=True)
class Environment:
    location_name: str
    scenario_name: str
    climate_variant: str

    @property
    def key(self) -> str:
        return f"{self.location_name}/{self.scenario_name}/{self.climate_variant}"


@dataclass(frozen=True)
class PredictionTable:
    """Dense (environment, config, output) prediction grid."""

    config_ids: np.ndarray   # (n,) unique ids, ascending
    environments: tuple      # Environment cells, unique keys
    output_labels: tuple
    means: np.ndarray        # (envs, n, outputs)
    cvs: np.ndarray          # same shape, coefficient of variation

    def __post_init__(self):
        n_env, n_cfg, n_out = len(self.environments), self.config_ids.size, \
            len(self.output_labels)
        if self.means.shape != (n_env, n_cfg, n_out):
            raise InputError(f"means shape {self.means.shape} does not match "
                             f"({n_env}, {n_cfg}, {n_out})")
        if self.cvs.shape != self.means.shape:
            raise InputError("cvs shape must match means")
        keys = [env.key for env in self.environments]
        if len(set(keys)) != len(keys):
            raise InputError("duplicate environment keys")
        if np.unique(self.config_ids).size != self.config_ids.size:
            raise InputError("duplicate config ids")

    @classmethod
    def from_rows(cls, rows, output_labels) -> "PredictionTable":
        """Assemble from (config_id, Environment, means, cvs) records.

        The grid must be complete: every config id paired with every
        environment exactly once.
        """
        output_labels = tuple(output_labels)
        cells = {}
        envs = []
        env_keys = {}
        for config_id, env, mean_vec, cv_vec in rows:
            if env.key not in env_keys:
                env_keys[env.key] = env
                envs.append(env)
            cell = (int(config_id), env.key)
            if cell in cells:
                raise InputError(f"duplicate cell {cell}")
            mean_vec = np.asarray(mean_vec, dtype=np.float64)
            cv_vec = np.asarray(cv_vec, dtype=np.float64)
            if mean_vec.shape != (len(output_labels),) \
                    or cv_vec.shape != (len(output_labels),):
                raise InputError(f"cell {cell}: expected "
                                 f"{len(output_labels)} outputs")
            cells[cell] = (mean_vec, cv_vec)

        ids = np.array(sorted({cid for cid, _ in cells}), dtype=np.int64)
        missing = [(int(cid), key) for cid in ids for key in env_keys
                   if (int(cid), key) not in cells]
        if missing:
            shown = ", ".join(f"({cid}, {key})" for cid, key in missing[:8])
            more = "" if len(missing) <= 8 else f" and {len(missing) - 8} more"
            raise InputError(f"incomplete grid: missing cells {shown}{more}")

        means = np.empty((len(envs), ids.size, len(output_labels)))
        cvs = np.empty_like(means)
        for e, env in enumerate(envs):
            for i, cid in enumerate(ids):
                means[e, i], cvs[e, i] = cells[(int(cid), env.key)]
        return cls(ids, tuple(envs), output_labels, means, cvs)


def rank_topk_per_env(table: PredictionTable, k: int,
                      target_output: str = DEFAULT_TARGET) -> dict:
    """Top-k config ids per environment by predicted target mean.

    Ties on the mean fall back to smaller cv, then smaller config id,
    so the selection is a total order.
    """
    if not 1 <= k <= table.config_ids.size:
        raise InputError(f"k must lie in [1, {table.config_ids.size}]")
    if target_output not in table.output_labels:
        raise InputError(f"unknown output '{target_output}'; expected one "
                         f"of {', '.join(table.output_labels)}")
    col = table.output_labels.index(target_output)

    top = {}
    for e, env in enumerate(table.environments):
        mean = table.means[e, :, col]
        cv = table.cvs[e, :, col]
        # lexsort uses the last key as primary
        order = np.lexsort((table.config_ids, cv, -mean))
        top[env] = frozenset(int(i) for i in table.config_ids[order[:k]])
    return top


@dataclass(frozen=True)
class ResilienceResult:
    resilient_ids: np.ndarray   # sorted ascending
    fraction_of_space: float
    per_env_topk: dict

    @property
    def fraction_text(self) -> str:
        """Percent of the searched space, 2 significant figures."""
        return f"{100.0 * self.fraction_of_space:.2g}%"


def intersect_resilient(per_env_topk: dict, cv_retained: dict,
                        total_configs: int) -> ResilienceResult:
    """Configs in every environment's top-K that pass the CV filter there.

    `cv_retained` maps each environment to the set of config ids kept by
    the confidence filter.
    """
    if total_configs < 1:
        raise InputError("total_configs must be >= 1")
    if set(per_env_topk) != set(cv_retained):
        raise InputError("per_env_topk and cv_retained must cover the same "
                         "environments")
    if not per_env_topk:
        raise InputError("at least one environment is required")

    resilient = None
    for env, ids in per_env_topk.items():
        kept = frozenset(ids) & frozenset(cv_retained[env])
        resilient = kept if resilient is None else resilient & kept
    ids = np.array(sorted(resilient), dtype=np.int64)
    return ResilienceResult(ids, ids.size / total_configs, dict(per_env_topk))
