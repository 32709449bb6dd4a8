from bosonic_dd.cli import main


def run(args):
    return main(args)


def body_lines(path):
    return [l for l in path.read_text().splitlines() if not l.startswith("#")]


class TestSchedule:
    def test_decoupling_line_count(self, tmp_path):
        out = tmp_path / "dec.txt"
        assert run(["schedule", "--scheme", "decoupling", "--N", "2",
                    "--nS", "1", "--out", str(out)]) == 0
        assert len(body_lines(out)) == 2

    def test_nudd_line_count(self, tmp_path):
        out = tmp_path / "nudd.txt"
        assert run(["schedule", "--scheme", "qubit-nudd", "--N", "1",
                    "--m", "1", "--out", str(out)]) == 0
        assert len(body_lines(out)) == 16

    def test_homogenization_line_count(self, tmp_path):
        out = tmp_path / "hom.txt"
        assert run(["schedule", "--scheme", "homogenization", "--N", "1",
                    "--m", "1", "--out", str(out)]) == 0
        assert len(body_lines(out)) == 8

    def test_bad_order(self, tmp_path):
        assert run(["schedule", "--scheme", "decoupling", "--N", "0",
                    "--nS", "1", "--out", str(tmp_path / "x.txt")]) == 2

    def test_idempotent(self, tmp_path):
        a, b = tmp_path / "a.txt", tmp_path / "b.txt"
        for out in (a, b):
            run(["schedule", "--scheme", "homogenization", "--N", "2",
                 "--m", "1", "--out", str(out)])
        assert a.read_bytes() == b.read_bytes()


class TestSweeps:
    def test_decouple_sweep_passes_and_is_deterministic(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        args = ["decouple-sweep", "--seed", "3", "--N", "1", "--nS", "1",
                "--nE", "1", "--points", "6", "--tmin", "1e-3",
                "--tmax", "1e-1"]
        assert run(args + ["--out", str(a)]) == 0
        assert run(args + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
        header = a.read_text().splitlines()[0]
        assert header == "T,residual,omega,bound,floor"

    def test_zero_coupling_floor_flags(self, tmp_path):
        out = tmp_path / "zero.csv"
        assert run(["decouple-sweep", "--seed", "1", "--N", "1", "--nS", "1",
                    "--nE", "1", "--scale-se", "0.0", "--points", "4",
                    "--out", str(out)]) == 0
        rows = out.read_text().splitlines()[1:]
        assert all(row.split(",")[4] == "1" for row in rows)

    def test_homogenize_sweep(self, tmp_path):
        out = tmp_path / "hom.csv"
        assert run(["homogenize-sweep", "--seed", "2", "--N", "1", "--m", "1",
                    "--nE", "1", "--points", "6", "--out", str(out)]) == 0
        rows = out.read_text().splitlines()[1:]
        # omega column populated
        assert all(row.split(",")[2] != "" for row in rows)

    def test_homogenize_rejects_bad_mode_count(self, tmp_path):
        assert run(["homogenize-sweep", "--N", "1", "--m", "1", "--nS", "3",
                    "--out", str(tmp_path / "x.csv")]) == 2

    def test_bad_grid(self, tmp_path):
        assert run(["decouple-sweep", "--tmin", "0.1", "--tmax", "0.01",
                    "--out", str(tmp_path / "x.csv")]) == 2


class TestVerify:
    def test_requires_checks(self, tmp_path):
        assert run(["verify", "--out", str(tmp_path / "v.csv")]) == 2

    def test_small_suite_passes(self, tmp_path):
        out = tmp_path / "v.csv"
        assert run(["verify", "--check", "all", "--N", "1", "--m", "1",
                    "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "check,s,r,labels,value,required_zero,pass"
        assert len(lines) > 3

    def test_mutation_detected(self, tmp_path):
        assert run(["verify", "--check", "homogenization", "--N", "2",
                    "--m", "1", "--mutate", "--out", str(tmp_path / "m.csv")]) == 1

    def test_unknown_check(self, tmp_path):
        assert run(["verify", "--check", "bogus",
                    "--out", str(tmp_path / "u.csv")]) == 2


class TestSpectrum:
    def test_odd_pulse_count_rejected(self, tmp_path):
        assert run(["spectrum", "--L", "3", "--out", str(tmp_path / "s.csv")]) == 2

    def test_zero_couplings_zero_columns(self, tmp_path):
        out = tmp_path / "s.csv"
        assert run(["spectrum", "--L", "2", "--coupling-scale", "0.0",
                    "--points", "5", "--out", str(out)]) == 0
        rows = [r.split(",") for r in out.read_text().splitlines()[1:]]
        for row in rows:
            assert float(row[1]) == 0.0  # x (udd train)
            assert float(row[2]) == 0.0  # y (udd train)

    def test_comparison_columns_present(self, tmp_path):
        out = tmp_path / "s.csv"
        assert run(["spectrum", "--L", "2", "--points", "4",
                    "--out", str(out)]) == 0
        header = out.read_text().splitlines()[0].split(",")
        assert header == ["T", "x_udd", "y_udd", "yL2_udd",
                          "x_periodic", "y_periodic", "yL2_periodic"]

    def test_cross_validate_column(self, tmp_path):
        out = tmp_path / "s.csv"
        assert run(["spectrum", "--L", "2", "--points", "3", "--nE", "2",
                    "--cross-validate", "--out", str(out)]) == 0
        rows = [r.split(",") for r in out.read_text().splitlines()[1:]]
        for row in rows:
            assert float(row[4]) < 1e-8  # dev_udd
            assert float(row[8]) < 1e-8  # dev_periodic


class TestWorkerPool:
    def test_thread_count_does_not_change_output(self, tmp_path, monkeypatch):
        args = ["homogenize-sweep", "--seed", "4", "--N", "1", "--m", "1",
                "--points", "5"]
        serial = tmp_path / "serial.csv"
        threaded = tmp_path / "threaded.csv"
        monkeypatch.delenv("BDD_THREADS", raising=False)
        assert run(args + ["--out", str(serial)]) == 0
        monkeypatch.setenv("BDD_THREADS", "3")
        assert run(args + ["--out", str(threaded)]) == 0
        assert serial.read_bytes() == threaded.read_bytes()


class TestConfigFile:
    def test_config_supplies_defaults_and_flags_win(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# sweep configuration\nseed=7\npoints=4\nN=1\n"
                       "nS=1\nnE=1\n")
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        assert run(["decouple-sweep", "--config", str(cfg),
                    "--out", str(a)]) == 0
        assert run(["decouple-sweep", "--seed", "7", "--points", "4",
                    "--N", "1", "--nS", "1", "--nE", "1",
                    "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
        # explicit flag overrides the config value
        c = tmp_path / "c.csv"
        assert run(["decouple-sweep", "--config", str(cfg), "--points", "5",
                    "--out", str(c)]) == 0
        assert len(c.read_text().splitlines()) == 6
