from __future__ import annotations

import json
import logging
from pathlib import Path

import pytest

from conftest import PLACEHOLDERS, PLANTED_SECRETS, write_eval_csv
from secretsift.cli import main
from secretsift.datasets import load_dataset, summarize
from secretsift.finetune import manifest_from_text


def run(capsys, *argv: str) -> tuple[int, str, str]:
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestScan:
    def test_clean_tree(self, capsys, clean_tree):
        code, out, _ = run(capsys, "scan", str(clean_tree), "--classify", "mock")
        assert code == 0
        doc = json.loads(out)
        assert doc["findings"] == []
        assert doc["summary"]["files_scanned"] == 2

    def test_single_planted_secret(self, capsys, tmp_path):
        (tmp_path / "app.py").write_text(f'KEY = "{PLANTED_SECRETS[0]}"\n')
        code, out, _ = run(capsys, "scan", str(tmp_path), "--classify", "mock")
        assert code == 1
        (finding,) = json.loads(out)["findings"]
        assert finding["verdict"] == "Secret"
        assert finding["pattern_id"] == "stripe_secret_key"

    def test_planted_tree(self, capsys, planted_tree):
        code, out, _ = run(capsys, "scan", str(planted_tree), "--classify", "mock")
        assert code == 1
        doc = json.loads(out)
        assert doc["summary"]["classified_secret"] == 5
        assert doc["summary"]["files_skipped"] == 1
        secrets = [f for f in doc["findings"] if f["verdict"] == "Secret"]
        assert len(secrets) == 5

    def test_without_classify_any_candidate_fails(self, capsys, planted_tree):
        code, out, _ = run(capsys, "scan", str(planted_tree))
        assert code == 1
        assert all("verdict" in f and f["verdict"] is None for f in json.loads(out)["findings"])

    def test_redaction_covers_all_streams(self, capsys, caplog, planted_tree):
        caplog.set_level(logging.DEBUG)
        for fmt in ("json", "table"):
            _, out, err = run(capsys, "-vv", "scan", str(planted_tree), "--classify", "mock", "--format", fmt)
            for s in PLANTED_SECRETS + PLACEHOLDERS:
                assert s not in out and s not in err and s not in caplog.text

    def test_no_redact(self, capsys, planted_tree):
        _, out, _ = run(capsys, "scan", str(planted_tree), "--no-redact")
        assert PLANTED_SECRETS[0] in out

    def test_deterministic_across_concurrency(self, capsys, planted_tree):
        outputs = {run(capsys, "scan", str(planted_tree), "--classify", "mock", "--concurrency", n)[1] for n in ("1", "1", "4", "16")}
        assert len(outputs) == 1

    def test_multiclass_types_secrets(self, capsys, planted_tree):
        _, out, _ = run(capsys, "scan", str(planted_tree), "--classify", "mock", "--mode", "multiclass", "--shots", "2")
        types = {f["secret_type"] for f in json.loads(out)["findings"] if f["verdict"] == "Secret"}
        assert types <= {"api_key_and_secret", "authentication_key_and_token"}

    def test_out_file_and_context_chars(self, capsys, planted_tree, tmp_path):
        dest = tmp_path / "r.json"
        code, out, _ = run(capsys, "scan", str(planted_tree), "--classify", "mock", "--out", str(dest), "--context-chars", "300")
        assert code == 1 and out == ""
        assert json.loads(dest.read_text())["window_chars"] == 300

    def test_single_file_root(self, capsys, planted_tree):
        code, out, _ = run(capsys, "scan", str(planted_tree / "config" / "app.env"), "--classify", "mock")
        assert code == 1
        assert json.loads(out)["summary"]["classified_secret"] == 1

    def test_remote_without_endpoint_is_fatal(self, capsys, planted_tree, monkeypatch):
        monkeypatch.delenv("SECRETSIFT_API_BASE", raising=False)
        code, _, err = run(capsys, "scan", str(planted_tree), "--classify", "remote")
        assert code == 2 and "SECRETSIFT_API_BASE" in err

    @pytest.mark.parametrize(
        "argv",
        [
            ["scan"],
            ["scan", "/definitely/not/here"],
            ["scan", ".", "--shots", "9"],
            ["scan", ".", "--classify", "llm"],
            ["bogus"],
        ],
    )
    def test_fatal_exit(self, capsys, argv):
        assert run(capsys, *argv)[0] == 2

    def test_bad_catalog(self, capsys, planted_tree, tmp_path):
        bad = tmp_path / "cat.json"
        bad.write_text('{"patterns": [{"id": "x", "name": "x", "regex": "(a)\\\\1", "secret_type": "other"}]}')
        code, _, err = run(capsys, "scan", str(planted_tree), "--catalog", str(bad))
        assert code == 2 and "error" in err


class TestEvaluate:
    def test_regex_only_baseline(self, capsys, tmp_path):
        path = write_eval_csv(tmp_path / "eval.csv")
        code, out, _ = run(capsys, "evaluate", "--dataset", str(path), "--backend", "regex-only")
        assert code == 0
        pos = json.loads(out)["metrics"]["positive"]
        assert (pos["precision"], pos["recall"]) == (0.5, 1.0)

    def test_mock_matches_hand_count(self, capsys, tmp_path):
        path = write_eval_csv(tmp_path / "eval.csv")
        code, out, _ = run(capsys, "evaluate", "--dataset", str(path), "--backend", "mock", "--shots", "0")
        assert code == 0
        m = json.loads(out)["metrics"]
        # 9 of 10 secrets caught, 1 checksum flagged
        assert m["confusion_matrix"] == {"labels": ["Secret", "Non-sensitive"], "counts": [[9, 1], [1, 9]]}
        assert m["accuracy"] == 0.9
        assert m["positive"] == {"precision": 0.9, "recall": 0.9, "f1": 0.9, "f2": 0.9}

    def test_table_format(self, capsys, tmp_path):
        path = write_eval_csv(tmp_path / "eval.csv")
        _, out, _ = run(capsys, "evaluate", "--dataset", str(path), "--format", "table")
        assert out.splitlines()[-1].split() == ["accuracy", "0.9000"]

    def test_multiclass_on_binary_data(self, capsys, tmp_path):
        path = write_eval_csv(tmp_path / "eval.csv")
        code, _, err = run(capsys, "evaluate", "--dataset", str(path), "--mode", "multiclass")
        assert code == 2 and "secret_type" in err

    def test_multiclass_typed(self, capsys, tmp_path):
        path = write_eval_csv(tmp_path / "eval.csv", typed=True)
        code, out, _ = run(capsys, "evaluate", "--dataset", str(path), "--mode", "multiclass")
        assert code == 0
        doc = json.loads(out)
        assert doc["examples"] == 10
        assert doc["metrics"]["confusion_matrix"]["labels"][0] == "Private Key"

    def test_context_recut_from_file(self, capsys, tmp_path):
        src = tmp_path / "src"
        src.mkdir()
        secret = PLANTED_SECRETS[0]
        text = f'KEY = "{secret}"\n'
        (src / "a.py").write_text(text)
        start = text.index(secret)
        data = tmp_path / "d.csv"
        data.write_text(
            "id,candidate,context,file_path,start_offset,end_offset,label,secret_type\n"
            f"r1,{secret},,src/a.py,{start},{start + len(secret)},secret,\n"
        )
        code, out, _ = run(capsys, "evaluate", "--dataset", str(data))
        assert code == 0
        assert json.loads(out)["metrics"]["confusion_matrix"]["counts"] == [[1, 0], [0, 0]]

    def test_missing_dataset(self, capsys, tmp_path):
        assert run(capsys, "evaluate", "--dataset", str(tmp_path / "none.csv"))[0] == 2


def _pool_csv(path: Path, n_pos: int, n_neg: int) -> Path:
    types = ["private_key", "api_key_and_secret", "password", "username"]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("id,candidate,context,file_path,start_offset,end_offset,label,secret_type\n")
        for i in range(n_pos):
            fh.write(f"p{i:06d},s{i},,,,,secret,{types[i % 4]}\n")
        for i in range(n_neg):
            fh.write(f"n{i:06d},x{i},,,,,non_sensitive,\n")
    return path


@pytest.fixture(scope="module")
def pool_csv(tmp_path_factory) -> Path:
    return _pool_csv(tmp_path_factory.mktemp("pool") / "pool.csv", 15_000, 30_000)


class TestSplit:
    def test_balanced_files(self, capsys, pool_csv, tmp_path):
        code, out, _ = run(capsys, "split", "--dataset", str(pool_csv), "--strategy", "balanced", "--seed", "42", "--out-dir", str(tmp_path / "a"))
        assert code == 0
        sizes = {n: summarize(load_dataset(tmp_path / "a" / f"{n}.csv")) for n in ("train", "validation", "test")}
        assert sizes["train"] == {"total": 24_000, "secret": 12_000, "non_sensitive": 12_000}
        assert sizes["test"]["total"] == sizes["validation"]["total"] == 3_000
        assert "train: 24000 rows" in out

    def test_imbalanced(self, capsys, pool_csv, tmp_path):
        run(capsys, "split", "--dataset", str(pool_csv), "--strategy", "imbalanced", "--seed", "1", "--out-dir", str(tmp_path))
        assert summarize(load_dataset(tmp_path / "train.csv"))["secret"] == 3_750

    def test_byte_identical(self, capsys, pool_csv, tmp_path):
        for d in ("a", "b"):
            run(capsys, "split", "--dataset", str(pool_csv), "--strategy", "multiclass", "--seed", "0xFFFFFFFFFFFFFFFF", "--out-dir", str(tmp_path / d))
        for n in ("train", "validation", "test"):
            assert (tmp_path / "a" / f"{n}.csv").read_bytes() == (tmp_path / "b" / f"{n}.csv").read_bytes()

    def test_insufficient_pool(self, capsys, tmp_path):
        small = _pool_csv(tmp_path / "small.csv", 100, 100)
        code, _, err = run(capsys, "split", "--dataset", str(small), "--strategy", "balanced", "--seed", "1", "--out-dir", str(tmp_path / "o"))
        assert code == 2 and "secrets" in err

    @pytest.mark.parametrize("seed", ["-1", "18446744073709551616", "abc"])
    def test_bad_seed(self, capsys, pool_csv, tmp_path, seed):
        assert run(capsys, "split", "--dataset", str(pool_csv), "--strategy", "balanced", "--seed", seed, "--out-dir", str(tmp_path))[0] == 2


class TestEmitFinetuneConfig:
    def test_writes_manifest(self, capsys, tmp_path):
        dest = tmp_path / "qlora.toml"
        assert run(capsys, "emit-finetune-config", "--model", "llama-3.1-8b", "--out", str(dest))[0] == 0
        text = dest.read_text()
        assert "learning_rate = 2e-4\n" in text
        m = manifest_from_text(text)
        assert m.model_id == "llama-3.1-8b" and m.lora_rank == 64

    def test_stdout(self, capsys):
        code, out, _ = run(capsys, "emit-finetune-config", "--model", "m")
        assert code == 0 and out.endswith('model_id = "m"\n')

    def test_empty_model(self, capsys):
        assert run(capsys, "emit-finetune-config", "--model", "")[0] == 2


def test_version(capsys):
    code, out, _ = run(capsys, "--version")
    assert code == 0 and out.startswith("secretsift ")
