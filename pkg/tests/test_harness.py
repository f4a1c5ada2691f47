"""Corpus ingestion, evaluation, sweeps, training, reports, and the CLI."""

import json
import math

import pytest

from emma_stream.emma.params import LossWeights
from emma_stream.errors import CorpusError, TrainingDivergedError
from emma_stream.harness import (COLUMNS, Manifest, SweepReport, SweepRow,
                                 evaluate_corpus, generate_corpus,
                                 load_instances, render_report,
                                 threshold_sweep, train_toy_policy,
                                 write_corpus)
from emma_stream.harness.cli import main
from emma_stream.harness.training import ToyTrainConfig, train_single
from emma_stream.runtime import RuntimeConfig


def write_jsonl(path, entries):
    path.write_text("".join(json.dumps(e) + "\n" for e in entries),
                    encoding="utf-8")
    return path


def copy_corpus_path(tmp_path, n=10, length=6, chunk_ms=1000.0, seed=3):
    return write_corpus(generate_corpus(n, length, chunk_ms, vocab=50, seed=seed),
                        tmp_path / "corpus.jsonl")


# -- instance loading ---------------------------------------------------------

def test_load_empty_file_gives_empty_list(tmp_path):
    p = tmp_path / "empty.jsonl"
    p.write_text("", encoding="utf-8")
    assert load_instances(p) == []


def test_load_single_instance_converts_ms_to_seconds(tmp_path):
    p = write_jsonl(tmp_path / "one.jsonl", [
        {"id": "a", "source": [{"dur_ms": 320, "token": 5}], "reference": [5]}])
    insts = load_instances(p)
    assert len(insts) == 1
    assert insts[0].id == "a"
    assert insts[0].source_duration_s == pytest.approx(0.32)
    assert insts[0].reference == (5,)


def test_load_zero_duration_names_instance(tmp_path):
    p = write_jsonl(tmp_path / "bad.jsonl", [
        {"id": "broken", "source": [{"dur_ms": 0, "token": 1}], "reference": [1]}])
    with pytest.raises(CorpusError, match="broken"):
        load_instances(p)


def test_load_malformed_line_reports_line_number(tmp_path):
    p = tmp_path / "mixed.jsonl"
    good = json.dumps({"id": "a", "source": [{"dur_ms": 10, "token": 1}],
                       "reference": [1]})
    p.write_text(good + "\n{not json\n", encoding="utf-8")
    with pytest.raises(CorpusError, match=":2:"):
        load_instances(p)


def test_load_duplicate_id_rejected(tmp_path):
    entry = {"id": "dup", "source": [{"dur_ms": 10, "token": 1}], "reference": [1]}
    p = write_jsonl(tmp_path / "dup.jsonl", [entry, entry])
    with pytest.raises(CorpusError, match="dup"):
        load_instances(p)


def test_load_empty_source_rejected(tmp_path):
    p = write_jsonl(tmp_path / "es.jsonl", [{"id": "x", "source": [],
                                             "reference": [1]}])
    with pytest.raises(CorpusError, match="empty source"):
        load_instances(p)


# -- manifest -----------------------------------------------------------------

def test_manifest_from_file_resolves_relative_instances(tmp_path):
    corpus = copy_corpus_path(tmp_path, n=2)
    mpath = tmp_path / "m.json"
    mpath.write_text(json.dumps({
        "instances": corpus.name,
        "model": {"kind": "scripted_stochastic", "parameters": {"heads": 3}},
        "runtime": {"threshold": 0.6, "min_unit_chunk": 2},
        "sweep": [0.4, 0.6],
        "seed": 9,
    }), encoding="utf-8")
    m = Manifest.from_file(mpath)
    assert m.instances == corpus
    assert m.model_kind == "scripted_stochastic"
    assert m.model_parameters == {"heads": 3}
    assert m.runtime.threshold == 0.6
    assert m.runtime.min_unit_chunk == 2
    assert m.sweep == (0.4, 0.6)
    assert m.seed == 9


def test_manifest_missing_instance_file_rejected(tmp_path):
    mpath = tmp_path / "m.json"
    mpath.write_text(json.dumps({"instances": "nope.jsonl"}), encoding="utf-8")
    with pytest.raises(ValueError, match="nope.jsonl"):
        Manifest.from_file(mpath)


def test_manifest_unknown_model_kind_rejected(tmp_path):
    corpus = copy_corpus_path(tmp_path, n=1)
    with pytest.raises(ValueError, match="unknown model kind"):
        Manifest(instances=corpus, model_kind="oracle")


def test_manifest_threshold_outside_unit_interval_rejected(tmp_path):
    corpus = copy_corpus_path(tmp_path, n=1)
    with pytest.raises(ValueError, match="sweep threshold"):
        Manifest(instances=corpus, sweep=(0.5, 1.0))


# -- corpus evaluation --------------------------------------------------------

def waitk_manifest(tmp_path, k=2, **kwargs):
    corpus = copy_corpus_path(tmp_path, **kwargs)
    return Manifest(instances=corpus, model_kind="scripted_waitk",
                    model_parameters={"k": k},
                    runtime=RuntimeConfig(threshold=0.5))


def test_wait2_copy_corpus_al_2_bleu_100(tmp_path):
    res = evaluate_corpus(waitk_manifest(tmp_path, k=2, n=10, length=6))
    assert res.latency.al == pytest.approx(2.0, abs=1e-9)
    assert res.quality.bleu == pytest.approx(100.0, abs=1e-6)
    assert res.n_instances == 10
    assert res.failures == ()


def test_offline_corpus_al_is_mean_duration(tmp_path):
    # wait-k with k >= longest source never writes before the drain
    entries = []
    for i, length in enumerate([3, 5, 8]):
        payloads = list(range(10, 10 + length))
        entries.append({"id": f"off-{i}",
                        "source": [{"dur_ms": 1000, "token": t} for t in payloads],
                        "reference": payloads})
    corpus = write_jsonl(tmp_path / "off.jsonl", entries)
    m = Manifest(instances=corpus, model_kind="scripted_waitk",
                 model_parameters={"k": 100})
    res = evaluate_corpus(m)
    assert res.latency.al == pytest.approx((3 + 5 + 8) / 3, abs=1e-9)
    assert res.quality.bleu == pytest.approx(100.0, abs=1e-6)


def test_per_instance_failures_recorded_not_fatal(tmp_path):
    entries = [{"id": f"ok-{i}",
                "source": [{"dur_ms": 1000, "token": 10 + i}],
                "reference": [10 + i]} for i in range(3)]
    # empty reference parses but cannot be scored (AL needs ref_len >= 1)
    entries.append({"id": "bad", "source": [{"dur_ms": 1000, "token": 9}],
                    "reference": []})
    corpus = write_jsonl(tmp_path / "mix.jsonl", entries)
    m = Manifest(instances=corpus, model_kind="scripted_waitk",
                 model_parameters={"k": 1})
    res = evaluate_corpus(m)
    assert res.n_instances == 3
    assert len(res.failures) == 1
    assert res.failures[0][0] == "bad"


def test_all_failed_corpus_raises(tmp_path):
    entries = [{"id": f"bad-{i}", "source": [{"dur_ms": 1000, "token": 1}],
                "reference": []} for i in range(3)]
    corpus = write_jsonl(tmp_path / "allbad.jsonl", entries)
    m = Manifest(instances=corpus, model_kind="scripted_waitk")
    with pytest.raises(CorpusError, match="all 3 instances failed"):
        evaluate_corpus(m)


def stochastic_manifest(tmp_path, **kwargs):
    corpus = copy_corpus_path(tmp_path, **kwargs)
    return Manifest(instances=corpus, model_kind="scripted_stochastic",
                    model_parameters={"heads": 2, "temperature": 1.0},
                    runtime=RuntimeConfig(threshold=0.5),
                    sweep=(0.4, 0.5, 0.6, 0.7), seed=11)


def test_worker_counts_1_and_8_bit_identical(tmp_path):
    m = stochastic_manifest(tmp_path, n=12)
    solo = evaluate_corpus(m, workers=1)
    pooled = evaluate_corpus(m, workers=8)
    assert solo == pooled
    assert render_report(solo) == render_report(pooled)


def test_repeated_runs_bit_identical(tmp_path):
    m = stochastic_manifest(tmp_path, n=8)
    assert render_report(evaluate_corpus(m)) == render_report(evaluate_corpus(m))


def test_toy_trained_model_evaluates(tmp_path):
    corpus = copy_corpus_path(tmp_path, n=4, length=5)
    m = Manifest(instances=corpus, model_kind="toy_trained",
                 model_parameters={"steps": 40, "lambda_latency": 0.2},
                 seed=5)
    res = evaluate_corpus(m)
    assert res.n_instances == 4
    assert res.quality.bleu == pytest.approx(100.0, abs=1e-6)


# -- threshold sweep ----------------------------------------------------------

def test_sweep_stochastic_al_non_decreasing(tmp_path):
    report = threshold_sweep(stochastic_manifest(tmp_path, n=12))
    als = [row.al for row in report.rows]
    assert [row.threshold for row in report.rows] == [0.4, 0.5, 0.6, 0.7]
    assert all(b >= a - 1e-12 for a, b in zip(als, als[1:]))


def test_sweep_waitk_rows_identical(tmp_path):
    m = waitk_manifest(tmp_path, k=2)
    m = Manifest(instances=m.instances, model_kind="scripted_waitk",
                 model_parameters={"k": 2}, sweep=(0.4, 0.5, 0.6, 0.7))
    report = threshold_sweep(m)
    stripped = {tuple(
        getattr(r, c) for c in COLUMNS if c != "threshold")
        for r in report.rows}
    assert len(stripped) == 1


def test_sweep_needs_two_thresholds(tmp_path):
    corpus = copy_corpus_path(tmp_path, n=2)
    m = Manifest(instances=corpus, sweep=(0.5,))
    with pytest.raises(ValueError, match="two thresholds"):
        threshold_sweep(m)


# -- toy training -------------------------------------------------------------

def test_training_needs_two_weight_settings():
    with pytest.raises(ValueError, match="two loss-weight settings"):
        train_toy_policy(ToyTrainConfig(weight_settings=(LossWeights(0, 0),)))


def test_pure_nll_descent_decreases_loss():
    run = train_single(ToyTrainConfig(steps=150, seed=0), LossWeights(0.0, 0.0))
    assert run.final["loss"] < run.log[0]["loss"]
    assert run.final["loss"] == run.final["nll"]


def test_latency_weight_lowers_final_delay():
    cfg = ToyTrainConfig(steps=150, seed=0,
                         weight_settings=(LossWeights(0.0, 0.0),
                                          LossWeights(0.5, 0.0)))
    report = train_toy_policy(cfg)
    free, constrained = report.finals("delay_mean")
    assert constrained < free


def test_variance_weight_lowers_final_variance():
    cfg = ToyTrainConfig(steps=150, seed=1,
                         weight_settings=(LossWeights(0.0, 0.0),
                                          LossWeights(0.0, 0.5)))
    report = train_toy_policy(cfg)
    free, constrained = report.finals("variance")
    assert constrained < free


def test_divergence_aborts_with_step_number():
    cfg = ToyTrainConfig(steps=60, learning_rate=1000.0, seed=0)
    with pytest.raises(TrainingDivergedError) as exc:
        train_single(cfg, LossWeights(0.0, 0.0))
    assert exc.value.step >= 0
    assert "step" in str(exc.value)


def test_training_runs_share_initial_loss():
    cfg = ToyTrainConfig(steps=5, seed=4,
                         weight_settings=(LossWeights(0.0, 0.0),
                                          LossWeights(0.0, 0.0)))
    a, b = train_toy_policy(cfg).runs
    assert a.log[0]["nll"] == b.log[0]["nll"]
    assert a.log[0]["delay_mean"] == b.log[0]["delay_mean"]


# -- report emission ----------------------------------------------------------

ROW = SweepRow(threshold=0.5, bleu=87.3219874, al=1.23456789, laal=1.5,
               start_offset=0.25, end_offset=-0.125, n_instances=10,
               n_failures=2)


def test_csv_header_matches_contract():
    text = render_report(SweepReport(rows=()))
    assert text == "threshold,bleu,al,laal,start_offset,end_offset,n_instances,n_failures\n"


def test_one_row_csv_round_trips():
    text = render_report(SweepReport(rows=(ROW,)))
    lines = text.strip().split("\n")
    assert len(lines) == 2
    values = dict(zip(lines[0].split(","), lines[1].split(",")))
    assert values["threshold"] == "0.500000"
    assert values["bleu"] == "87.321987"
    assert values["n_instances"] == "10"
    assert values["n_failures"] == "2"


def test_json_and_csv_contain_identical_values():
    csv_text = render_report(SweepReport(rows=(ROW,)), format="csv")
    json_text = render_report(SweepReport(rows=(ROW,)), format="json")
    header, data = csv_text.strip().split("\n")
    from_csv = {}
    for col, cell in zip(header.split(","), data.split(",")):
        from_csv[col] = int(cell) if col.startswith("n_") else float(cell)
    from_json = json.loads(json_text)["rows"][0]
    assert from_csv == from_json


def test_emit_report_writes_file(tmp_path):
    from emma_stream.harness import emit_report
    out = tmp_path / "report.csv"
    text = emit_report(SweepReport(rows=(ROW,)), path=out)
    assert out.read_text(encoding="utf-8") == text


def test_unknown_format_rejected():
    with pytest.raises(ValueError, match="format"):
        render_report(SweepReport(rows=()), format="yaml")


# -- command line -------------------------------------------------------------

def cli_manifest(tmp_path, kind="scripted_stochastic", sweep=(0.4, 0.5, 0.6, 0.7)):
    corpus = copy_corpus_path(tmp_path, n=6)
    mpath = tmp_path / "manifest.json"
    mpath.write_text(json.dumps({
        "instances": corpus.name,
        "model": {"kind": kind,
                  "parameters": {"k": 2} if kind == "scripted_waitk"
                  else {"heads": 2, "temperature": 1.0}},
        "runtime": {"threshold": 0.5},
        "sweep": list(sweep),
        "seed": 11,
    }), encoding="utf-8")
    return mpath


def test_cli_gen_writes_corpus(tmp_path):
    out = tmp_path / "c.jsonl"
    assert main(["gen", "--out", str(out), "--n", "4", "--length", "3",
                 "--chunk-ms", "500"]) == 0
    insts = load_instances(out)
    assert len(insts) == 4
    assert insts[0].source_duration_s == pytest.approx(1.5)


def test_cli_evaluate_writes_csv(tmp_path):
    mpath = cli_manifest(tmp_path, kind="scripted_waitk")
    out = tmp_path / "report.csv"
    assert main(["evaluate", "--manifest", str(mpath), "--out", str(out)]) == 0
    lines = out.read_text(encoding="utf-8").strip().split("\n")
    assert lines[0] == ",".join(COLUMNS)
    cells = dict(zip(COLUMNS, lines[1].split(",")))
    assert cells["al"] == "2.000000"
    assert cells["bleu"] == "100.000000"


def test_cli_sweep_json_rows_sorted(tmp_path):
    mpath = cli_manifest(tmp_path)
    out = tmp_path / "sweep.json"
    assert main(["sweep", "--manifest", str(mpath), "--format", "json",
                 "--out", str(out)]) == 0
    rows = json.loads(out.read_text(encoding="utf-8"))["rows"]
    assert [r["threshold"] for r in rows] == [0.4, 0.5, 0.6, 0.7]


def test_cli_trace_dir_writes_event_logs(tmp_path):
    mpath = cli_manifest(tmp_path, kind="scripted_waitk")
    tdir = tmp_path / "traces"
    assert main(["evaluate", "--manifest", str(mpath),
                 "--trace-dir", str(tdir), "--out",
                 str(tmp_path / "r.csv")]) == 0
    logs = sorted(tdir.glob("*.jsonl"))
    assert len(logs) == 6
    first = logs[0].read_text(encoding="utf-8").strip().split("\n")
    assert json.loads(first[0])["kind"] in ("READ", "WRITE")
    assert json.loads(first[-1])["kind"] == "SUMMARY"


def test_cli_l_unit_override_batches_emissions(tmp_path):
    mpath = cli_manifest(tmp_path, kind="scripted_waitk")
    lo = tmp_path / "lo.csv"
    hi = tmp_path / "hi.csv"
    assert main(["evaluate", "--manifest", str(mpath), "--out", str(lo)]) == 0
    assert main(["evaluate", "--manifest", str(mpath), "--l-unit", "6",
                 "--out", str(hi)]) == 0
    start = COLUMNS.index("start_offset")
    lo_start = float(lo.read_text().strip().split("\n")[1].split(",")[start])
    hi_start = float(hi.read_text().strip().split("\n")[1].split(",")[start])
    assert hi_start > lo_start  # six-unit batches delay the first emission


def test_cli_threshold_override(tmp_path):
    mpath = cli_manifest(tmp_path)
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    assert main(["evaluate", "--manifest", str(mpath), "--threshold", "0.4",
                 "--out", str(a)]) == 0
    assert main(["evaluate", "--manifest", str(mpath), "--threshold", "0.7",
                 "--out", str(b)]) == 0
    al = COLUMNS.index("al")
    al_a = float(a.read_text().strip().split("\n")[1].split(",")[al])
    al_b = float(b.read_text().strip().split("\n")[1].split(",")[al])
    assert al_b >= al_a


def test_cli_train_toy_summary(tmp_path, capsys):
    assert main(["train-toy", "--steps", "80", "--lambda-latency", "0,0.5",
                 "--seed", "0"]) == 0
    lines = capsys.readouterr().out.strip().split("\n")
    rows = [json.loads(line) for line in lines]
    assert [r["lambda_latency"] for r in rows] == [0.0, 0.5]
    assert rows[1]["final_delay"] < rows[0]["final_delay"]
    assert all(math.isfinite(r["final_loss"]) for r in rows)


def test_cli_missing_manifest_exits_2(tmp_path, capsys):
    assert main(["evaluate", "--manifest", str(tmp_path / "nope.json")]) == 2
    assert "error" in capsys.readouterr().err


def test_cli_single_threshold_sweep_exits_2(tmp_path, capsys):
    mpath = cli_manifest(tmp_path, sweep=(0.5,))
    assert main(["sweep", "--manifest", str(mpath)]) == 2
    capsys.readouterr()


def test_cli_unparseable_args_exit_2(capsys):
    assert main(["evaluate"]) == 2
    capsys.readouterr()


def test_cli_all_failed_corpus_exits_1(tmp_path, capsys):
    entries = [{"id": "bad", "source": [{"dur_ms": 1000, "token": 1}],
                "reference": []}]
    corpus = write_jsonl(tmp_path / "allbad.jsonl", entries)
    mpath = tmp_path / "m.json"
    mpath.write_text(json.dumps({"instances": corpus.name}), encoding="utf-8")
    assert main(["evaluate", "--manifest", str(mpath)]) == 1
    assert "failed" in capsys.readouterr().err


def test_cli_corrupt_corpus_exits_1(tmp_path, capsys):
    corpus = tmp_path / "corrupt.jsonl"
    corpus.write_text("{oops\n", encoding="utf-8")
    mpath = tmp_path / "m.json"
    mpath.write_text(json.dumps({"instances": corpus.name}), encoding="utf-8")
    assert main(["evaluate", "--manifest", str(mpath)]) == 1
    capsys.readouterr()


def test_cli_runs_byte_identical(tmp_path):
    mpath = cli_manifest(tmp_path)
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    for out in (a, b):
        assert main(["sweep", "--manifest", str(mpath), "--format", "json",
                     "--out", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()
