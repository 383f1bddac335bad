"""End-to-end tests for the command-line interface and its file formats."""

import json
import shutil

import numpy as np
import pytest

from splinemix.basis import TimeGrid
from splinemix.cli import (
    load_dataset,
    load_fit_config,
    load_scenario_config,
    main,
    parse_config,
    parse_g_range,
    read_covariates,
    read_long_data,
    write_dataset,
)
from splinemix.errors import ConfigError, DataError
from splinemix.gibbs import PosteriorSamples
from splinemix.model import Dataset


def write_cfg(path, **keys):
    path.write_text("".join(f"{k} = {v}\n" for k, v in keys.items()))
    return str(path)


def read_rows(path):
    return [line.split(",") for line in path.read_text().splitlines()]


class TestParseConfig:
    def test_basic_parse_with_comments(self, tmp_path):
        p = tmp_path / "c.cfg"
        p.write_text("# leading comment\nG = 2\n\n  m=5  # trailing\nname = hi there\n")
        assert parse_config(p) == {"G": "2", "m": "5", "name": "hi there"}

    def test_missing_separator_reports_line(self, tmp_path):
        p = tmp_path / "c.cfg"
        p.write_text("G = 2\nbogus line\n")
        with pytest.raises(ConfigError, match=":2"):
            parse_config(p)

    def test_empty_value_rejected(self, tmp_path):
        p = tmp_path / "c.cfg"
        p.write_text("G =\n")
        with pytest.raises(ConfigError):
            parse_config(p)

    def test_duplicate_key_rejected(self, tmp_path):
        p = tmp_path / "c.cfg"
        p.write_text("G = 2\nG = 3\n")
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            parse_config(tmp_path / "nope.cfg")


class TestLoadFitConfig:
    def test_defaults(self, tmp_path):
        cfg, standardize = load_fit_config(write_cfg(tmp_path / "f.cfg", G=2))
        assert (cfg.G, cfg.m, cfg.iterations, cfg.burn_in, cfg.thin) == (2, 10, 20000, 4000, 1)
        assert cfg.seed == 0 and cfg.init == "kmeans" and standardize is False

    def test_all_keys_and_hyper_override(self, tmp_path):
        path = write_cfg(tmp_path / "f.cfg", G=3, m=4, iterations=50, burn_in=10,
                         thin=2, seed=9, init="random", standardize="true",
                         A_sigma=2.5, sigma_delta_sq=1.0)
        cfg, standardize = load_fit_config(path)
        assert (cfg.G, cfg.m, cfg.iterations, cfg.burn_in, cfg.thin, cfg.seed) == (3, 4, 50, 10, 2, 9)
        assert cfg.init == "random" and standardize is True
        assert cfg.hyper.A_sigma == 2.5 and cfg.hyper.sigma_delta_sq == 1.0
        assert cfg.hyper.nu_sigma == 3.0  # untouched default

    def test_missing_G(self, tmp_path):
        with pytest.raises(ConfigError, match="'G'"):
            load_fit_config(write_cfg(tmp_path / "f.cfg", m=5))

    def test_unknown_key_named(self, tmp_path):
        with pytest.raises(ConfigError, match="sweeps"):
            load_fit_config(write_cfg(tmp_path / "f.cfg", G=2, sweeps=100))

    def test_bad_int(self, tmp_path):
        with pytest.raises(ConfigError, match="iterations"):
            load_fit_config(write_cfg(tmp_path / "f.cfg", G=2, iterations="ten"))

    def test_bad_bool(self, tmp_path):
        with pytest.raises(ConfigError, match="standardize"):
            load_fit_config(write_cfg(tmp_path / "f.cfg", G=2, standardize="maybe"))

    def test_nonpositive_hyper(self, tmp_path):
        with pytest.raises(ConfigError, match="A_tau"):
            load_fit_config(write_cfg(tmp_path / "f.cfg", G=2, A_tau=-1))

    def test_seed_override(self, tmp_path):
        cfg, _ = load_fit_config(write_cfg(tmp_path / "f.cfg", G=2, seed=3),
                                 seed_override=77)
        assert cfg.seed == 77


class TestLoadScenarioConfig:
    def test_scenario_a(self, tmp_path):
        spec, reps = load_scenario_config(
            write_cfg(tmp_path / "s.cfg", scenario="A", N=20, n=10, m=4, seed=5))
        assert (spec.name, spec.N, spec.n, spec.m, spec.seed) == ("A", 20, 10, 4, 5)
        assert reps == 1

    def test_scenario_b_tau(self, tmp_path):
        spec, reps = load_scenario_config(
            write_cfg(tmp_path / "s.cfg", scenario="B", replicates=3, tau_sq=0.5))
        assert spec.name == "B" and reps == 3
        assert np.all(spec.tau_sq == 0.5)

    def test_tau_rejected_for_a(self, tmp_path):
        with pytest.raises(ConfigError, match="tau_sq"):
            load_scenario_config(write_cfg(tmp_path / "s.cfg", scenario="A", tau_sq=1))

    def test_bad_scenario(self, tmp_path):
        with pytest.raises(ConfigError, match="scenario"):
            load_scenario_config(write_cfg(tmp_path / "s.cfg", scenario="C"))

    def test_negative_replicates(self, tmp_path):
        with pytest.raises(ConfigError, match="replicates"):
            load_scenario_config(
                write_cfg(tmp_path / "s.cfg", scenario="A", replicates=-1))

    def test_seed_override(self, tmp_path):
        spec, _ = load_scenario_config(
            write_cfg(tmp_path / "s.cfg", scenario="A", seed=5), seed_override=8)
        assert spec.seed == 8


class TestGRange:
    @pytest.mark.parametrize("text,expected", [
        ("2", [2]),
        ("1,2,3", [1, 2, 3]),
        ("2:4", [2, 3, 4]),
        (" 3 ", [3]),
        ("5:5", [5]),
    ])
    def test_valid(self, text, expected):
        assert parse_g_range(text) == expected

    @pytest.mark.parametrize("text", ["3:1", "0", "1,1", "x", "", "1,0", "2:x"])
    def test_invalid(self, text):
        with pytest.raises(ConfigError):
            parse_g_range(text)


def random_dataset(rng, N=4, K=2, n=6, P=2):
    y = rng.standard_normal((N, K, n)) * np.exp(rng.standard_normal((N, K, n)))
    cov = np.hstack([np.ones((N, 1)), rng.standard_normal((N, P))])
    return Dataset(y=y, covariates=cov, grid=TimeGrid(np.linspace(0.0, 1.0, n)))


class TestDatasetFiles:
    def test_round_trip_bit_exact(self, tmp_path):
        ds = random_dataset(np.random.default_rng(3))
        write_dataset(ds, tmp_path / "d.csv", tmp_path / "c.csv")
        back = load_dataset(tmp_path / "d.csv", tmp_path / "c.csv")
        assert np.array_equal(back.y, ds.y)
        assert np.array_equal(back.covariates, ds.covariates)
        assert np.array_equal(back.grid.times, ds.grid.times)

    def test_times_rescaled_to_unit(self, tmp_path):
        (tmp_path / "d.csv").write_text(
            "subject,entry,time,value\n"
            + "".join(f"1,1,{t},0.5\n" for t in (2.0, 4.0, 7.0, 10.0)))
        (tmp_path / "c.csv").write_text("subject,x1\n1,0.3\n")
        ds = load_dataset(tmp_path / "d.csv", tmp_path / "c.csv")
        assert np.allclose(ds.grid.times, [0.0, 0.25, 0.625, 1.0])

    def test_standardize_flag(self, tmp_path):
        ds = random_dataset(np.random.default_rng(4), N=6)
        write_dataset(ds, tmp_path / "d.csv", tmp_path / "c.csv")
        back = load_dataset(tmp_path / "d.csv", tmp_path / "c.csv", standardize=True)
        cont = back.covariates[:, 1:]
        assert np.allclose(cont.mean(axis=0), 0.0, atol=1e-12)
        assert np.allclose(cont.std(axis=0, ddof=1), 1.0)

    def test_bad_header(self, tmp_path):
        (tmp_path / "d.csv").write_text("subj,entry,time,value\n1,1,0,0\n")
        with pytest.raises(DataError, match="header"):
            read_long_data(tmp_path / "d.csv")

    def test_wrong_field_count_reports_row(self, tmp_path):
        (tmp_path / "d.csv").write_text("subject,entry,time,value\n1,1,0\n")
        with pytest.raises(DataError, match=":2"):
            read_long_data(tmp_path / "d.csv")

    def test_non_numeric_value(self, tmp_path):
        (tmp_path / "d.csv").write_text("subject,entry,time,value\n1,1,0,oops\n")
        with pytest.raises(DataError, match="non-numeric"):
            read_long_data(tmp_path / "d.csv")

    def test_non_finite_value(self, tmp_path):
        (tmp_path / "d.csv").write_text("subject,entry,time,value\n1,1,0,inf\n")
        with pytest.raises(DataError, match="non-finite"):
            read_long_data(tmp_path / "d.csv")

    def test_empty_data(self, tmp_path):
        (tmp_path / "d.csv").write_text("subject,entry,time,value\n")
        with pytest.raises(DataError, match="no data rows"):
            read_long_data(tmp_path / "d.csv")

    def test_missing_entry_for_subject(self, tmp_path):
        (tmp_path / "d.csv").write_text(
            "subject,entry,time,value\n1,1,0,1\n1,2,0,1\n2,1,0,1\n")
        with pytest.raises(DataError, match="subject 2 is missing entry 2"):
            read_long_data(tmp_path / "d.csv")

    def test_grid_mismatch_names_subject(self, tmp_path):
        (tmp_path / "d.csv").write_text(
            "subject,entry,time,value\n1,1,0,1\n1,1,1,1\n2,1,0,1\n2,1,2,1\n")
        with pytest.raises(DataError, match="subject 2"):
            read_long_data(tmp_path / "d.csv")

    def test_covariates_bad_header(self, tmp_path):
        (tmp_path / "c.csv").write_text("id,x1\n1,0\n")
        with pytest.raises(DataError, match="header"):
            read_covariates(tmp_path / "c.csv", ["1"])

    def test_covariates_duplicate_subject(self, tmp_path):
        (tmp_path / "c.csv").write_text("subject,x1\n1,0\n1,2\n")
        with pytest.raises(DataError, match="duplicate"):
            read_covariates(tmp_path / "c.csv", ["1"])

    def test_covariates_missing_subject(self, tmp_path):
        (tmp_path / "c.csv").write_text("subject,x1\n1,0\n")
        with pytest.raises(DataError, match="no covariates"):
            read_covariates(tmp_path / "c.csv", ["1", "2"])

    def test_covariates_unknown_subject(self, tmp_path):
        (tmp_path / "c.csv").write_text("subject,x1\n1,0\n7,1\n")
        with pytest.raises(DataError, match="unknown subjects"):
            read_covariates(tmp_path / "c.csv", ["1"])

    def test_covariates_non_numeric(self, tmp_path):
        (tmp_path / "c.csv").write_text("subject,x1\n1,low\n")
        with pytest.raises(DataError, match="non-numeric"):
            read_covariates(tmp_path / "c.csv", ["1"])

    def test_covariates_width_mismatch(self, tmp_path):
        (tmp_path / "c.csv").write_text("subject,x1,x2\n1,0\n")
        with pytest.raises(DataError, match=":2"):
            read_covariates(tmp_path / "c.csv", ["1"])


def run_simulate(tmp_path, out_name="sim", N=10, n=8, seed=11, replicates=1,
                 workers=1, extra_args=()):
    cfg = write_cfg(tmp_path / "sim.cfg", scenario="A", N=N, n=n, m=3,
                    seed=seed, replicates=replicates)
    out = tmp_path / out_name
    rc = main(["simulate", "--config", cfg, "--out", str(out),
               "--workers", str(workers), *extra_args])
    assert rc == 0
    return out


class TestSimulateCommand:
    def test_outputs_and_row_counts(self, tmp_path):
        out = run_simulate(tmp_path, replicates=2)
        for rep in (0, 1):
            rows = read_rows(out / f"rep{rep:03d}_data.csv")
            assert rows[0] == ["subject", "entry", "time", "value"]
            assert len(rows) == 1 + 10 * 3 * 8
            cov_rows = read_rows(out / f"rep{rep:03d}_covariates.csv")
            assert cov_rows[0] == ["subject", "x1", "x2", "x3"]
            assert len(cov_rows) == 1 + 10
        truth = json.loads((out / "truth.json").read_text())
        assert truth["spec"]["scenario"] == "A"
        assert truth["spec"]["N"] == 10 and truth["spec"]["seed"] == 11
        assert len(truth["replicates"]) == 2
        rec = truth["replicates"][0]
        assert np.asarray(rec["mu"]).shape == (2, 3, 8)
        assert len(rec["labels"]) == 10

    def test_manifest_lists_existing_outputs(self, tmp_path):
        out = run_simulate(tmp_path)
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["command"] == "simulate"
        assert manifest["seed"] == 11
        assert manifest["outputs"]
        for name in manifest["outputs"]:
            assert (out / name).is_file()

    def test_zero_replicates(self, tmp_path):
        out = run_simulate(tmp_path, replicates=0)
        truth = json.loads((out / "truth.json").read_text())
        assert truth["replicates"] == []
        assert not list(out.glob("rep*"))

    def test_same_seed_byte_identical(self, tmp_path):
        out1 = run_simulate(tmp_path, out_name="s1", replicates=2)
        out2 = run_simulate(tmp_path, out_name="s2", replicates=2)
        for name in ("rep000_data.csv", "rep001_covariates.csv", "truth.json"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_worker_fanout_parity(self, tmp_path):
        out1 = run_simulate(tmp_path, out_name="w1", replicates=3, workers=1)
        out2 = run_simulate(tmp_path, out_name="w2", replicates=3, workers=2)
        for rep in range(3):
            name = f"rep{rep:03d}_data.csv"
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_seed_flag_overrides_config(self, tmp_path):
        out = run_simulate(tmp_path, extra_args=("--seed", "99"))
        truth = json.loads((out / "truth.json").read_text())
        assert truth["spec"]["seed"] == 99


@pytest.fixture(scope="module")
def tiny_fit(tmp_path_factory):
    """One small end-to-end simulate + fit, shared across assertions."""
    tmp = tmp_path_factory.mktemp("fit")
    sim = run_simulate(tmp)
    cfg = write_cfg(tmp / "fit.cfg", G=2, m=3, iterations=60, burn_in=20, seed=5)
    out = tmp / "fit_out"
    rc = main(["fit", "--data", str(sim / "rep000_data.csv"),
               "--covariates", str(sim / "rep000_covariates.csv"),
               "--config", cfg, "--out", str(out)])
    assert rc == 0
    return tmp, sim, cfg, out


class TestFitCommand:
    def test_summary_tables(self, tiny_fit):
        _, _, _, out = tiny_fit
        traj = read_rows(out / "trajectories.csv")
        assert traj[0] == ["component", "entry", "time", "mean", "lower", "upper"]
        assert len(traj) == 1 + 2 * 3 * 8
        lo = np.array([float(r[4]) for r in traj[1:]])
        mid = np.array([float(r[3]) for r in traj[1:]])
        hi = np.array([float(r[5]) for r in traj[1:]])
        assert np.all(lo <= mid) and np.all(mid <= hi)
        logi = read_rows(out / "logistic.csv")
        assert len(logi) == 1 + 2 * 4
        assert logi[1][1] == "delta0"

    def test_allocation_frequencies(self, tiny_fit):
        _, _, _, out = tiny_fit
        rows = read_rows(out / "allocations.csv")[1:]
        assert len(rows) == 10 * 2
        freq = {}
        for subj, _, f in rows:
            freq[subj] = freq.get(subj, 0.0) + float(f)
        assert all(abs(total - 1.0) < 1e-12 for total in freq.values())

    def test_samples_archive(self, tiny_fit):
        _, _, _, out = tiny_fit
        samples = PosteriorSamples.from_npz(out / "samples.npz")
        assert samples.alpha.shape[0] == 40  # (60 - 20) kept sweeps
        assert samples.config.G == 2 and samples.config.seed == 5

    def test_manifest(self, tiny_fit):
        _, _, _, out = tiny_fit
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["command"] == "fit"
        assert manifest["config"]["G"] == 2
        assert manifest["seed"] == 5
        assert "duration_s" in manifest
        for name in manifest["outputs"]:
            assert (out / name).is_file()

    def test_refit_identical_outputs(self, tiny_fit):
        tmp, sim, cfg, out = tiny_fit
        out2 = tmp / "fit_again"
        rc = main(["fit", "--data", str(sim / "rep000_data.csv"),
                   "--covariates", str(sim / "rep000_covariates.csv"),
                   "--config", cfg, "--out", str(out2)])
        assert rc == 0
        for name in ("samples.npz", "trajectories.csv", "logistic.csv",
                     "allocations.csv"):
            assert (out / name).read_bytes() == (out2 / name).read_bytes()

    def test_single_component_allocations_all_one(self, tiny_fit):
        tmp, sim, _, _ = tiny_fit
        cfg1 = write_cfg(tmp / "fit1.cfg", G=1, m=3, iterations=40, burn_in=10)
        out = tmp / "fit_g1"
        rc = main(["fit", "--data", str(sim / "rep000_data.csv"),
                   "--covariates", str(sim / "rep000_covariates.csv"),
                   "--config", cfg1, "--out", str(out)])
        assert rc == 0
        rows = read_rows(out / "allocations.csv")[1:]
        assert all(float(r[2]) == 1.0 for r in rows)

    def test_missing_data_file_exit_3(self, tiny_fit, capsys):
        tmp, sim, cfg, _ = tiny_fit
        rc = main(["fit", "--data", str(tmp / "absent.csv"),
                   "--covariates", str(sim / "rep000_covariates.csv"),
                   "--config", cfg, "--out", str(tmp / "x")])
        assert rc == 3
        assert "error:" in capsys.readouterr().err

    def test_bad_config_exit_2(self, tiny_fit, capsys):
        tmp, sim, _, _ = tiny_fit
        bad = write_cfg(tmp / "bad.cfg", G=2, wibble=1)
        rc = main(["fit", "--data", str(sim / "rep000_data.csv"),
                   "--covariates", str(sim / "rep000_covariates.csv"),
                   "--config", bad, "--out", str(tmp / "x2")])
        assert rc == 2
        assert "wibble" in capsys.readouterr().err


class TestSelectCommand:
    def test_range_table_and_pick(self, tmp_path, capsys):
        sim = run_simulate(tmp_path)
        cfg = write_cfg(tmp_path / "sel.cfg", G=1, m=3, iterations=60, burn_in=20,
                        seed=2)
        out = tmp_path / "sel_out"
        rc = main(["select", "--data", str(sim / "rep000_data.csv"),
                   "--covariates", str(sim / "rep000_covariates.csv"),
                   "--config", cfg, "--g-range", "1:2", "--out", str(out)])
        assert rc == 0
        rows = read_rows(out / "dic.csv")
        assert rows[0] == ["G", "mean_deviance", "p_v", "dic", "selected"]
        assert [r[0] for r in rows[1:]] == ["1", "2"]
        selected = [int(r[0]) for r in rows[1:] if r[4] == "1"]
        assert len(selected) == 1
        dics = {int(r[0]): float(r[3]) for r in rows[1:]}
        assert dics[selected[0]] == min(dics.values())
        assert f"selected G = {selected[0]}" in capsys.readouterr().out
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["config"]["g_range"] == [1, 2]

    def test_single_value_range(self, tmp_path, capsys):
        sim = run_simulate(tmp_path)
        cfg = write_cfg(tmp_path / "sel.cfg", G=1, m=3, iterations=40, burn_in=10)
        out = tmp_path / "sel1"
        rc = main(["select", "--data", str(sim / "rep000_data.csv"),
                   "--covariates", str(sim / "rep000_covariates.csv"),
                   "--config", cfg, "--g-range", "2", "--out", str(out)])
        assert rc == 0
        rows = read_rows(out / "dic.csv")
        assert len(rows) == 2 and rows[1][0] == "2" and rows[1][4] == "1"
        assert "selected G = 2" in capsys.readouterr().out

    def test_worker_parity(self, tmp_path):
        sim = run_simulate(tmp_path)
        cfg = write_cfg(tmp_path / "sel.cfg", G=1, m=3, iterations=60, burn_in=20)
        outs = []
        for name, workers in (("w1", "1"), ("w2", "2")):
            out = tmp_path / name
            rc = main(["select", "--data", str(sim / "rep000_data.csv"),
                       "--covariates", str(sim / "rep000_covariates.csv"),
                       "--config", cfg, "--g-range", "1,2", "--out", str(out),
                       "--workers", workers])
            assert rc == 0
            outs.append(out)
        assert (outs[0] / "dic.csv").read_bytes() == (outs[1] / "dic.csv").read_bytes()


def plant_fits_from_truth(truth_path, fits_dir, perms=None, traj_offset=None):
    """Write per-replicate fit tables that echo the generating truth."""
    truth = json.loads(truth_path.read_text())
    spec = truth["spec"]
    G, K, n = spec["G"], spec["K"], spec["n"]
    delta = np.asarray(spec["delta"])
    times = np.linspace(0.0, 1.0, n)
    R = len(truth["replicates"])
    pad = max(3, len(str(R - 1)))
    for r, rec in enumerate(truth["replicates"]):
        mu = np.asarray(rec["mu"])
        if traj_offset is not None:
            mu = mu + traj_offset
        perm = perms[r] if perms is not None else list(range(G))
        inv = np.argsort(perm)
        mu_out, delta_out = mu[inv], delta[inv]
        delta_out = delta_out - delta_out[-1]
        rep_dir = fits_dir / f"rep{r:0{pad}d}"
        rep_dir.mkdir(parents=True, exist_ok=True)
        with open(rep_dir / "trajectories.csv", "w") as fh:
            fh.write("component,entry,time,mean,lower,upper\n")
            for g in range(G):
                for k in range(K):
                    for j in range(n):
                        v = mu_out[g, k, j]
                        fh.write(f"{g+1},{k+1},{times[j]},{v},{v},{v}\n")
        with open(rep_dir / "logistic.csv", "w") as fh:
            fh.write("component,coefficient,mean,lower,upper\n")
            for g in range(G):
                for p in range(delta.shape[1]):
                    v = delta_out[g, p]
                    fh.write(f"{g+1},delta{p},{v},{v},{v}\n")


class TestEvaluateCommand:
    def test_truth_copied_fits_score_zero(self, tmp_path):
        sim = run_simulate(tmp_path, replicates=2)
        fits = tmp_path / "fits"
        plant_fits_from_truth(sim / "truth.json", fits)
        out = tmp_path / "eval"
        rc = main(["evaluate", "--truth", str(sim / "truth.json"),
                   "--fits", str(fits), "--out", str(out)])
        assert rc == 0
        metrics = json.loads((out / "metrics.json").read_text())
        assert np.allclose(metrics["arse_mean"], 0.0)
        assert np.allclose(metrics["abias_mean"], 0.0)
        assert np.allclose(metrics["vbias_mean"], 0.0)
        assert np.allclose(metrics["rmse"], 0.0)
        assert metrics["permutations"] == [[0, 1], [0, 1]]

    def test_label_permutation_recovered(self, tmp_path):
        sim = run_simulate(tmp_path, replicates=2)
        fits = tmp_path / "fits"
        plant_fits_from_truth(sim / "truth.json", fits, perms=[[1, 0], [0, 1]])
        out = tmp_path / "eval"
        rc = main(["evaluate", "--truth", str(sim / "truth.json"),
                   "--fits", str(fits), "--out", str(out)])
        assert rc == 0
        metrics = json.loads((out / "metrics.json").read_text())
        assert np.allclose(metrics["arse_mean"], 0.0)
        assert np.allclose(metrics["rmse"], 0.0)
        assert metrics["permutations"] == [[1, 0], [0, 1]]

    def test_planted_offset_scores_exactly(self, tmp_path):
        sim = run_simulate(tmp_path, replicates=1)
        fits = tmp_path / "fits"
        plant_fits_from_truth(sim / "truth.json", fits, traj_offset=0.25)
        out = tmp_path / "eval"
        rc = main(["evaluate", "--truth", str(sim / "truth.json"),
                   "--fits", str(fits), "--out", str(out)])
        assert rc == 0
        metrics = json.loads((out / "metrics.json").read_text())
        assert np.allclose(metrics["arse_mean"], 0.25)
        assert np.allclose(metrics["abias_mean"], 0.25)
        assert np.allclose(metrics["vbias_mean"], 0.0)
        rows = read_rows(out / "metrics_trajectories.csv")
        assert float(rows[1][1]) == pytest.approx(0.25)

    def test_missing_replicate_dir_exit_3(self, tmp_path, capsys):
        sim = run_simulate(tmp_path, replicates=2)
        fits = tmp_path / "fits"
        plant_fits_from_truth(sim / "truth.json", fits)
        shutil.rmtree(fits / "rep001")
        rc = main(["evaluate", "--truth", str(sim / "truth.json"),
                   "--fits", str(fits), "--out", str(tmp_path / "eval")])
        assert rc == 3
        assert "rep001" in capsys.readouterr().err

    def test_incomplete_table_rejected(self, tmp_path, capsys):
        sim = run_simulate(tmp_path, replicates=1)
        fits = tmp_path / "fits"
        plant_fits_from_truth(sim / "truth.json", fits)
        path = fits / "rep000" / "trajectories.csv"
        lines = path.read_text().splitlines()
        path.write_text("\n".join(lines[:-3]) + "\n")
        rc = main(["evaluate", "--truth", str(sim / "truth.json"),
                   "--fits", str(fits), "--out", str(tmp_path / "eval")])
        assert rc == 3
        assert "incomplete" in capsys.readouterr().err

    def test_empty_truth_rejected(self, tmp_path, capsys):
        sim = run_simulate(tmp_path, replicates=0)
        rc = main(["evaluate", "--truth", str(sim / "truth.json"),
                   "--fits", str(tmp_path / "fits"), "--out", str(tmp_path / "e")])
        assert rc == 3
        assert "no replicates" in capsys.readouterr().err
