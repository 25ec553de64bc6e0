"""Pipeline stages behind the CLI subcommands.

Each stage reads its inputs from the run directory, writes its own
artifacts there, and records their checksums in manifest.json. All
stages are deterministic for a fixed config, so a rerun produces
byte-identical artifacts.
"""

import csv
import hashlib
import json
import os
from dataclasses import asdict

import numpy as np

from ..cropsim import (OUTPUT_NAMES, pin_environment, run_batch, soil_by_name,
                       soil_names, read_dataset_csv, write_dataset_csv)
from ..cropsim.batch import BatchResult
from ..discovery import (DEFAULT_TARGET, Environment, PredictionTable,
                         cluster_summary, genotype_matrix, genotype_names,
                         intersect_resilient, pca_project,
                         permutation_importance, rank_topk_per_env)
from ..emulator import (build_dataset, config_features, evaluate_split,
                        learning_curve, load_emulator, save_emulator,
                        train_emulator)
from ..errors import InputError
from ..sampling import default_space, design_batch, read_design_csv, \
    write_design_csv
from ..swag import (SwagConfig, calibration_metrics, cv_filter,
                    ensemble_predict, finetune_collect, load_posterior,
                    rank_environments_by_cv, save_posterior)
from ..weather import (SCENARIO_PRESETS, encode_series, build_latent_index,
                       load_autoencoder, load_weather_csv,
                       reconstruction_metrics, reconstruct_series,
                       save_autoencoder, scenario_perturb, synth_generate,
                       synthetic_corpus, train_rain_ae, train_temprad_ae,
                       write_weather_csv)
from .config import RunConfig

MANIFEST_NAME = "manifest.json"

ARTIFACTS = {
    "design": ("design.csv",),
    "simulate": ("dataset.csv",),
    "train-weather": ("weather_temprad.bin", "weather_rain.bin",
                      "weather_metrics.json"),
    "synth-weather": ("synth_weather.csv",),
    "train-emulator": ("dataset_encoded.csv", "emulator.bin",
                       "emulator_eval.json"),
    "swag": ("swag.bin",),
    "evaluate": ("evaluate.json",),
    "discover": ("discovery.json", "importance.csv", "pca_coords.csv"),
    "report": ("report.json", "report_weather.csv", "report_emulator.csv",
               "report_calibration.csv"),
}

STAGE_ORDER = tuple(ARTIFACTS)

# stage that produces each artifact, for actionable missing-file errors
_PRODUCER = {name: stage for stage, names in ARTIFACTS.items()
             for name in names}


def _sha256_file(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _jsonable(value):
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def _record(out_dir: str, cfg: RunConfig, stage: str, seeds: dict) -> None:
    manifest_path = os.path.join(out_dir, MANIFEST_NAME)
    manifest = {"config_sha256": cfg.sha256(), "stages": {}}
    if os.path.exists(manifest_path):
        with open(manifest_path) as fh:
            old = json.load(fh)
        manifest["stages"] = old.get("stages", {})
    checksums = {name: _sha256_file(os.path.join(out_dir, name))
                 for name in ARTIFACTS[stage]}
    manifest["stages"][stage] = {"seeds": seeds, "artifacts": checksums}
    _write_json(manifest_path, manifest)


def _require(out_dir: str, name: str) -> str:
    path = os.path.join(out_dir, name)
    if not os.path.exists(path):
        raise InputError(f"{name} not found in {out_dir}; run the "
                         f"'{_PRODUCER[name]}' stage first")
    return path


def _load_corpus(cfg: RunConfig) -> list:
    if cfg.paths.weather_csv:
        corpus = load_weather_csv(cfg.paths.weather_csv)
    else:
        corpus = synthetic_corpus()
    if not corpus:
        raise InputError("weather corpus is empty")
    return corpus


def _site_soil(cfg: RunConfig, location: str):
    name = cfg.oracle.soil or location
    try:
        return soil_by_name(name)
    except InputError:
        if cfg.oracle.soil:
            raise
        raise InputError(
            f"no soil profile named after site '{location}' (profiles: "
            f"{', '.join(soil_names())}); set oracle.soil explicitly")


def _load_weather_models(out_dir: str):
    temprad = load_autoencoder(_require(out_dir, "weather_temprad.bin"))
    rain = load_autoencoder(_require(out_dir, "weather_rain.bin"))
    return temprad, rain


def _rebuild_dataset(cfg: RunConfig, out_dir: str):
    rows = read_dataset_csv(_require(out_dir, "dataset_encoded.csv"))
    if np.isnan(rows["latents"]).any():
        raise InputError("dataset_encoded.csv has missing weather latents; "
                         "rerun the 'train-emulator' stage")
    return build_dataset(default_space(), rows["configs"], rows["latents"],
                         rows["lats"], rows["outputs"],
                         test_fraction=cfg.emulator.test_fraction,
                         seed=cfg.emulator.seed)


def _bn_subset(cfg: RunConfig, data) -> np.ndarray:
    take = data.train_indices[:cfg.swag.bn_rows]
    return data.features[take]


# ---------------------------------------------------------------- stages

def stage_design(cfg: RunConfig, out_dir: str) -> str:
    batch = design_batch(default_space(), cfg.sampling.count,
                         skip_count=cfg.sampling.skip, seed=cfg.sampling.seed)
    write_design_csv(os.path.join(out_dir, "design.csv"), batch)
    _record(out_dir, cfg, "design", {"sampling": cfg.sampling.seed})
    return f"design: {cfg.sampling.count} configs -> design.csv"


def stage_simulate(cfg: RunConfig, out_dir: str) -> str:
    sobol_indices, configs = read_design_csv(_require(out_dir, "design.csv"))
    corpus = _load_corpus(cfg)
    sites = sorted({s.location for s in corpus})
    n = len(configs)

    parts = []
    for site, rows in zip(sites, np.array_split(np.arange(n), len(sites))):
        if rows.size == 0:
            continue
        sub = [s for s in corpus if s.location == site]
        sub_global = [i for i, s in enumerate(corpus) if s.location == site]
        result = run_batch([configs[i] for i in rows],
                           [sobol_indices[i] for i in rows],
                           sub, _site_soil(cfg, site),
                           seed=cfg.sampling.seed, jobs=cfg.oracle.jobs)
        parts.append((result, sub_global))

    merged = BatchResult(
        sobol_indices=tuple(i for r, _ in parts for i in r.sobol_indices),
        configs=tuple(c for r, _ in parts for c in r.configs),
        weather_keys=tuple(k for r, _ in parts for k in r.weather_keys),
        weather_indices=tuple(g[w] for r, g in parts
                              for w in r.weather_indices),
        lats=np.concatenate([r.lats for r, _ in parts]),
        outputs=np.vstack([r.outputs for r, _ in parts]),
    )
    write_dataset_csv(os.path.join(out_dir, "dataset.csv"), merged)
    _record(out_dir, cfg, "simulate", {"weather_draw": cfg.sampling.seed})
    return f"simulate: {n} runs over {len(sites)} sites -> dataset.csv"


def stage_train_weather(cfg: RunConfig, out_dir: str) -> str:
    corpus = _load_corpus(cfg)
    w = cfg.weather
    temprad = train_temprad_ae(corpus, learning_rate=w.temprad_learning_rate,
                               epochs=w.epochs, batch_size=w.batch_size,
                               seed=w.seed)
    rain = train_rain_ae(corpus, learning_rate=w.rain_learning_rate,
                         epochs=w.epochs, batch_size=w.batch_size, seed=w.seed)
    save_autoencoder(os.path.join(out_dir, "weather_temprad.bin"), temprad)
    save_autoencoder(os.path.join(out_dir, "weather_rain.bin"), rain)

    recon = [reconstruct_series(temprad, rain, s) for s in corpus]
    metrics = reconstruction_metrics(corpus, recon)
    _write_json(os.path.join(out_dir, "weather_metrics.json"),
                _jsonable(asdict(metrics)))
    _record(out_dir, cfg, "train-weather", {"weather": w.seed})
    return (f"train-weather: {len(corpus)} series, {w.epochs} epochs -> "
            f"weather_temprad.bin, weather_rain.bin")


def stage_synth_weather(cfg: RunConfig, out_dir: str) -> str:
    corpus = _load_corpus(cfg)
    temprad, rain = _load_weather_models(out_dir)
    w = cfg.weather
    latents = encode_series(temprad, rain, corpus)
    index = build_latent_index(latents, corpus,
                               latitude_weight=w.latitude_weight)
    series = synth_generate(index, temprad, rain, count=w.synth_count,
                            k=w.neighbors, seed=w.seed)
    write_weather_csv(os.path.join(out_dir, "synth_weather.csv"), series)
    _record(out_dir, cfg, "synth-weather", {"weather": w.seed})
    return f"synth-weather: {len(series)} series -> synth_weather.csv"


def stage_train_emulator(cfg: RunConfig, out_dir: str) -> str:
    rows = read_dataset_csv(_require(out_dir, "dataset.csv"))
    corpus = _load_corpus(cfg)
    temprad, rain = _load_weather_models(out_dir)

    key_to_row = {s.key: i for i, s in enumerate(corpus)}
    try:
        positions = [key_to_row[k] for k in rows["weather_keys"]]
    except KeyError as exc:
        raise InputError(f"dataset references weather series {exc} missing "
                         "from the corpus; config and dataset disagree")
    latents = encode_series(temprad, rain, corpus)[positions]

    encoded = BatchResult(rows["sobol_indices"], rows["configs"],
                          rows["weather_keys"], tuple(positions),
                          rows["lats"], rows["outputs"])
    write_dataset_csv(os.path.join(out_dir, "dataset_encoded.csv"),
                      encoded, latents=latents)

    e = cfg.emulator
    data = build_dataset(default_space(), rows["configs"], latents,
                         rows["lats"], rows["outputs"],
                         test_fraction=e.test_fraction, seed=e.seed)
    model = train_emulator(data, hidden=tuple(e.hidden),
                           learning_rate=e.learning_rate,
                           weight_decay=e.weight_decay, epochs=e.epochs,
                           batch_size=e.batch_size, seed=e.seed)
    save_emulator(os.path.join(out_dir, "emulator.bin"), model)

    train_rep = evaluate_split(model, data, "train")
    test_rep = evaluate_split(model, data, "test")
    curve = []
    if e.curve_sizes:
        curve = learning_curve(data, list(e.curve_sizes), seed=e.seed,
                               hidden=tuple(e.hidden),
                               learning_rate=e.learning_rate,
                               weight_decay=e.weight_decay, epochs=e.epochs,
                               batch_size=e.batch_size)
    _write_json(os.path.join(out_dir, "emulator_eval.json"), {
        "train": _jsonable(asdict(train_rep)),
        "test": _jsonable(asdict(test_rep)),
        "learning_curve": [_jsonable(asdict(p)) for p in curve],
    })
    _record(out_dir, cfg, "train-emulator", {"emulator": e.seed})
    return (f"train-emulator: {len(data.train_indices)} train rows, "
            f"test r2 {test_rep.r2:.4f} -> emulator.bin")


def stage_swag(cfg: RunConfig, out_dir: str) -> str:
    model = load_emulator(_require(out_dir, "emulator.bin"))
    data = _rebuild_dataset(cfg, out_dir)
    s = cfg.swag
    swag_cfg = SwagConfig(learning_rate=s.learning_rate, momentum=s.momentum,
                          weight_decay=s.weight_decay,
                          total_epochs=s.total_epochs,
                          collect_from_epoch=s.collect_from_epoch,
                          sample_count=s.sample_count, max_rank=s.max_rank,
                          batch_size=s.batch_size)
    posterior = finetune_collect(model, data, swag_cfg, seed=s.seed)
    save_posterior(os.path.join(out_dir, "swag.bin"), posterior)
    _record(out_dir, cfg, "swag", {"swag": s.seed})
    return (f"swag: {posterior.snapshot_count} snapshots, rank "
            f"{len(posterior.deviations)} -> swag.bin")


def stage_evaluate(cfg: RunConfig, out_dir: str) -> str:
    model = load_emulator(_require(out_dir, "emulator.bin"))
    posterior = load_posterior(_require(out_dir, "swag.bin"))
    data = _rebuild_dataset(cfg, out_dir)

    test_x = data.features[data.test_indices]
    test_y = data.targets[data.test_indices]
    prediction = ensemble_predict(posterior, model, test_x,
                                  _bn_subset(cfg, data),
                                  sample_count=cfg.swag.sample_count,
                                  seed=cfg.swag.seed)
    report = calibration_metrics(prediction, test_y,
                                 target_labels=data.target_labels)
    _write_json(os.path.join(out_dir, "evaluate.json"),
                _jsonable(asdict(report)))
    _record(out_dir, cfg, "evaluate", {"swag": cfg.swag.seed})
    target_col = data.target_labels.index(DEFAULT_TARGET)
    return (f"evaluate: coverage95[{DEFAULT_TARGET}] "
            f"{report.coverage95[target_col]:.3f} -> evaluate.json")


def _candidate_configs(cfg: RunConfig):
    """Unseen design continuation with management pinned."""
    d = cfg.discovery
    batch = design_batch(default_space(), d.count,
                         skip_count=cfg.sampling.skip + cfg.sampling.count)
    management = dict(type(d)().management)
    management.update(d.management)
    configs = tuple(
        c.replace(population=float(management["Population"]),
                  start_date_offset=int(management["StartDateOffset"]),
                  fertilize_at_sowing=float(management["FertilizeAtSowing"]))
        for c in batch.configs)
    return np.asarray(batch.sobol_indices, dtype=np.int64), configs


def _environment_grid(cfg: RunConfig, locations) -> list:
    envs = []
    for loc in locations:
        for scenario in cfg.weather.scenarios:
            for variant in range(cfg.weather.variants):
                envs.append(Environment(loc, scenario, f"v{variant}"))
    return envs


def stage_discover(cfg: RunConfig, out_dir: str) -> str:
    model = load_emulator(_require(out_dir, "emulator.bin"))
    posterior = load_posterior(_require(out_dir, "swag.bin"))
    temprad, rain = _load_weather_models(out_dir)
    data = _rebuild_dataset(cfg, out_dir)
    bn = _bn_subset(cfg, data)

    corpus = _load_corpus(cfg)
    locations = sorted({s.location for s in corpus})
    space = default_space()
    d = cfg.discovery
    config_ids, candidates = _candidate_configs(cfg)
    n = len(candidates)
    target_col = model.target_labels.index(DEFAULT_TARGET)

    envs = _environment_grid(cfg, locations)
    means = np.empty((len(envs), n, len(model.target_labels)))
    cvs = np.empty_like(means)
    pinned_by_loc, feats_by_loc, series_by_loc = {}, {}, {}
    for loc in locations:
        soil = _site_soil(cfg, loc)
        pinned = tuple(pin_environment(c, soil) for c in candidates)
        pinned_by_loc[loc] = pinned
        feats_by_loc[loc] = config_features(space, pinned)
        series_by_loc[loc] = [s for s in corpus if s.location == loc]

    for e, env in enumerate(envs):
        loc_series = series_by_loc[env.location_name]
        spec = SCENARIO_PRESETS[env.scenario_name]
        variant_seed = int(env.climate_variant[1:])
        perturbed = [scenario_perturb(s, spec, seed=variant_seed)
                     for s in loc_series]
        env_latent = encode_series(temprad, rain, perturbed).mean(axis=0)
        lat = loc_series[0].lat
        feats = np.hstack([feats_by_loc[env.location_name],
                           np.tile(env_latent, (n, 1)),
                           np.full((n, 1), lat)])
        pred = ensemble_predict(posterior, model, feats, bn,
                                sample_count=cfg.swag.sample_count,
                                seed=cfg.swag.seed)
        means[e], cvs[e] = pred.mean, pred.cv

    table = PredictionTable(config_ids, tuple(envs),
                            tuple(model.target_labels), means, cvs)
    per_env_topk = rank_topk_per_env(table, d.top_k)

    cv_flat = np.concatenate([cvs[e, :, target_col]
                              for e in range(len(envs))])
    tags = [env.key for env in envs for _ in range(n)]
    ranking = rank_environments_by_cv(cv_flat, tags)
    mask = cv_filter(cv_flat, tags, ranking,
                     default_threshold=d.cv_default_threshold,
                     relaxed_threshold=d.cv_relaxed_threshold,
                     relaxed_env_count=d.cv_relaxed_env_count)
    cv_retained = {env: frozenset(config_ids[mask[e * n:(e + 1) * n]])
                   for e, env in enumerate(envs)}
    result = intersect_resilient(per_env_topk, cv_retained, d.count)

    if result.resilient_ids.size < max(d.cluster_count, 2):
        raise InputError(
            f"only {result.resilient_ids.size} resilient configs; need at "
            f"least {max(d.cluster_count, 2)} to cluster. Raise "
            "discovery.top_k or relax the cv thresholds")

    id_to_pos = {int(cid): i for i, cid in enumerate(config_ids)}
    resilient_pos = [id_to_pos[int(cid)] for cid in result.resilient_ids]
    traits = genotype_matrix(space, [candidates[i] for i in resilient_pos])
    trait_names = genotype_names(space)

    env_rows_by_loc = {loc: [e for e, env in enumerate(envs)
                             if env.location_name == loc]
                       for loc in locations}
    yields_by_location = {
        loc: means[rows][:, resilient_pos, target_col].mean(axis=0)
        for loc, rows in env_rows_by_loc.items()}
    clusters = cluster_summary(traits, trait_names, yields_by_location,
                               k=d.cluster_count, seed=d.seed,
                               restarts=d.cluster_restarts)
    projection = pca_project(traits, components=d.pca_components)

    with open(os.path.join(out_dir, "pca_coords.csv"), "w",
              newline="") as fh:
        writer = csv.writer(fh)
        axes = [f"pc{i + 1}" for i in range(d.pca_components)]
        writer.writerow(["config_id", *axes, "cluster"])
        for i, cid in enumerate(result.resilient_ids):
            writer.writerow([int(cid),
                             *(repr(float(v))
                               for v in projection.coordinates[i]),
                             int(clusters.assignments[i])])

    importance_by_loc = _trait_importance(cfg, out_dir, model, posterior, bn,
                                          temprad, rain, space, config_ids,
                                          pinned_by_loc, feats_by_loc,
                                          series_by_loc, target_col)

    _write_json(os.path.join(out_dir, "discovery.json"), {
        "target_output": DEFAULT_TARGET,
        "environments": [env.key for env in envs],
        "environment_cv_ranking": ranking,
        "cv_retained_counts": {env.key: int(mask[e * n:(e + 1) * n].sum())
                               for e, env in enumerate(envs)},
        "resilient_ids": _jsonable(result.resilient_ids),
        "fraction_of_space": result.fraction_of_space,
        "fraction_text": result.fraction_text,
        "clusters": {
            "count": clusters.cluster_count,
            "trait_names": list(clusters.trait_names),
            "trait_means": _jsonable(clusters.trait_means),
            "yield_mean": _jsonable(clusters.yield_mean),
            "yield_std": _jsonable(clusters.yield_std),
            "best_cluster_per_location":
                _jsonable(clusters.best_cluster_per_location),
            "sizes": _jsonable(np.bincount(clusters.assignments,
                                           minlength=clusters.cluster_count)),
        },
        "pca_explained": _jsonable(projection.explained),
        "importance": {loc: {"baseline_r2": rep.baseline_r2,
                             "top_trait":
                                 rep.feature_names[int(np.argmin(rep.rank))]}
                       for loc, rep in importance_by_loc.items()},
    })
    _record(out_dir, cfg, "discover", {"discovery": d.seed,
                                       "swag": cfg.swag.seed})
    return (f"discover: {result.resilient_ids.size} resilient configs "
            f"({result.fraction_text} of space) -> discovery.json")


def _trait_importance(cfg, out_dir, model, posterior, bn, temprad, rain,
                      space, config_ids, pinned_by_loc, feats_by_loc,
                      series_by_loc, target_col) -> dict:
    """Per-location permutation importance of the genotype traits.

    Targets are oracle yields under historical weather; the predictor is
    the ensemble mean with candidate trait columns swapped in.
    """
    d = cfg.discovery
    trait_names = genotype_names(space)
    trait_cols = _genotype_columns(space)

    reports = {}
    rows_out = []
    for loc in sorted(pinned_by_loc):
        pinned = pinned_by_loc[loc]
        loc_series = series_by_loc[loc]
        oracle = run_batch(pinned, list(range(len(pinned))), loc_series,
                           _site_soil(cfg, loc), seed=d.seed,
                           jobs=cfg.oracle.jobs)
        targets = oracle.outputs[:, target_col]

        z_all = encode_series(temprad, rain, loc_series)
        row_z = z_all[list(oracle.weather_indices)]
        lat = loc_series[0].lat
        feats = np.hstack([feats_by_loc[loc], row_z,
                           np.full((len(pinned), 1), lat)])

        def predict_fn(trait_matrix, feats=feats):
            swapped = feats.copy()
            swapped[:, trait_cols] = trait_matrix
            pred = ensemble_predict(posterior, model, swapped, bn,
                                    sample_count=cfg.swag.sample_count,
                                    seed=cfg.swag.seed)
            return pred.mean[:, target_col]

        report = permutation_importance(predict_fn, feats[:, trait_cols],
                                        targets, feature_names=trait_names,
                                        repeats=d.importance_repeats,
                                        seed=d.seed)
        reports[loc] = report
        for j in range(len(trait_names)):
            rows_out.append([loc, report.feature_names[j],
                             repr(float(report.importance[j])),
                             repr(float(report.percent[j])),
                             int(report.rank[j])])

    with open(os.path.join(out_dir, "importance.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["location", "trait", "r2_drop", "percent", "rank"])
        writer.writerows(rows_out)
    return reports


def _genotype_columns(space) -> list:
    """Positions of the genotype traits inside config_features columns."""
    free = [v.name for v in space.variables if v.kind != "derived"]
    wanted = set(genotype_names(space))
    return [j for j, name in enumerate(free) if name in wanted]


def stage_report(cfg: RunConfig, out_dir: str) -> str:
    with open(_require(out_dir, "weather_metrics.json")) as fh:
        weather = json.load(fh)
    with open(_require(out_dir, "emulator_eval.json")) as fh:
        emulator = json.load(fh)
    with open(_require(out_dir, "evaluate.json")) as fh:
        calibration = json.load(fh)
    with open(_require(out_dir, "discovery.json")) as fh:
        discovery = json.load(fh)

    report = {
        "schema_version": 1,
        "config_sha256": cfg.sha256(),
        "weather_reconstruction": weather,
        "emulator_accuracy": emulator,
        "calibration": calibration,
        "discovery": discovery,
    }
    _validate_report(report)
    _write_json(os.path.join(out_dir, "report.json"), report)

    with open(os.path.join(out_dir, "report_weather.csv"), "w",
              newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["channel", "rmse", "mae", "bias", "corr", "r2"])
        for channel in ("radn", "maxt", "mint", "rain"):
            stats = weather[channel]
            writer.writerow([channel] + [stats[k] for k in
                                         ("rmse", "mae", "bias", "corr",
                                          "r2")])
        occ = weather["occurrence"]
        writer.writerow(["rain_occurrence", "", "", "",
                         occ["accuracy"], occ["f1"]])

    with open(os.path.join(out_dir, "report_emulator.csv"), "w",
              newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["output", "test_mse", "test_mae"])
        test = emulator["test"]
        for j, label in enumerate(test["target_labels"]):
            writer.writerow([label, test["per_output_mse"][j],
                             test["per_output_mae"][j]])
        writer.writerow(["OVERALL", test["mse"], test["mae"]])

    with open(os.path.join(out_dir, "report_calibration.csv"), "w",
              newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["output", "coverage95", "mean_interval_width",
                         "mean_variance"])
        for j, label in enumerate(calibration["target_labels"]):
            writer.writerow([label, calibration["coverage95"][j],
                             calibration["mean_interval_width"][j],
                             calibration["mean_variance"][j]])
        corr = calibration["corr_var_sqerr"]
        writer.writerow(["POOLED_CORR_VAR_SQERR",
                         "" if corr is None else corr, "", ""])

    _record(out_dir, cfg, "report", {})
    return "report: report.json + 3 csv tables"


def _validate_report(report: dict) -> None:
    schema_path = os.path.join(os.path.dirname(__file__),
                               "report_schema.json")
    with open(schema_path) as fh:
        schema = json.load(fh)
    try:
        import jsonschema
    except ImportError:
        _check_minimal(report, schema)
        return
    jsonschema.validate(report, schema)


def _check_minimal(report: dict, schema: dict) -> None:
    missing = [k for k in schema.get("required", ()) if k not in report]
    if missing:
        raise InputError(f"report missing keys: {', '.join(missing)}")


STAGES = {
    "design": stage_design,
    "simulate": stage_simulate,
    "train-weather": stage_train_weather,
    "synth-weather": stage_synth_weather,
    "train-emulator": stage_train_emulator,
    "swag": stage_swag,
    "evaluate": stage_evaluate,
    "discover": stage_discover,
    "report": stage_report,
}


def run_stage(name: str, cfg: RunConfig, out_dir: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    return STAGES[name](cfg, out_dir)
