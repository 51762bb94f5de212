from __future__ import annotations

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.append(str(ROOT))

import pytest

from butterfly.cli import EXIT_FAILED, EXIT_OK, EXIT_RESOURCE, EXIT_USAGE, main
from butterfly.core.models import ForcingTrace


def _run(capsys, *argv: str) -> tuple[int, str]:
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_gen_edgelist(capsys) -> None:
    """
    Проверяет вывод BF(1) списком ребер: 4 вершины, 4 ребра.
    """
    code, out = _run(capsys, "gen", "-r", "1")
    assert code == EXIT_OK
    assert out.splitlines()[0] == "4 4"


def test_gen_matrix_recursive(capsys) -> None:
    """
    Проверяет вывод матрицы A_1 в рекурсивной нумерации.
    """
    code, out = _run(capsys, "gen", "-r", "1", "--format", "matrix", "--ordering", "recursive")
    assert code == EXIT_OK
    assert out.splitlines() == ["0 0 1 1", "0 0 1 1", "1 1 0 0", "1 1 0 0"]


def test_zf_check_default_set(capsys) -> None:
    """
    Проверяет zf check: S^(3) - zero forcing множество размера 14.
    """
    code, out = _run(capsys, "zf", "check", "-r", "3")
    assert code == EXIT_OK
    payload = json.loads(out)
    assert payload["forcing"] is True
    assert payload["size"] == 14


def test_zf_closure_with_set_file(capsys, tmp_path: Path) -> None:
    """
    Проверяет zf closure для графа и множества из файлов.

    Одна концевая вершина пути окрашивает весь путь P3 за два раунда.
    """
    graph = tmp_path / "p3.txt"
    graph.write_text("3 2\n0 1\n1 2\n", encoding="utf-8")
    start = tmp_path / "s.txt"
    start.write_text("0\n", encoding="utf-8")
    code, out = _run(capsys, "zf", "closure", "--graph", str(graph), "--set", str(start))
    assert code == EXIT_OK
    trace = json.loads(out)
    assert trace["pt"] == 2
    assert trace["final"] == [0, 1, 2]


def test_zf_closure_layered(capsys) -> None:
    """
    Проверяет пошаговый процесс по уровням: 2r шагов для r = 2.
    """
    code, out = _run(capsys, "zf", "closure", "-r", "2", "--layered")
    assert code == EXIT_OK
    assert len(json.loads(out)["rounds"]) == 4


def test_zf_min(capsys) -> None:
    """
    Проверяет zf min: Z(BF(1)) = 2.
    """
    code, out = _run(capsys, "zf", "min", "-r", "1")
    assert code == EXIT_OK
    assert json.loads(out)["value"] == 2


def test_rank(capsys) -> None:
    """
    Проверяет rank: rank(A_2) над Q равен mr(BF(2)) = 6.
    """
    code, out = _run(capsys, "rank", "-r", "2", "--field", "q")
    assert code == EXIT_OK
    payload = json.loads(out)
    assert payload["rank"] == payload["mr_formula"] == 6


def test_cert_show_worked_example(capsys) -> None:
    """
    Проверяет cert show для строки 65 при r = 4.

    Вывод содержит части K~1-, K~1+, K~2-, K~2+.
    """
    code, out = _run(capsys, "cert", "show", "-r", "4", "--target", "65")
    assert code == EXIT_OK
    payload = json.loads(out)
    assert payload["parts"]["k1_minus"] == [14, 18, 46, 50]
    assert payload["parts"]["k2_minus"] == [76, 77, 80]


def test_cert_build_writes_file(capsys, tmp_path: Path) -> None:
    """
    Проверяет cert build --out: книга для r = 3 из 14 сертификатов.
    """
    out_file = tmp_path / "book_3.json"
    code, _ = _run(capsys, "cert", "build", "-r", "3", "--out", str(out_file))
    assert code == EXIT_OK
    assert len(json.loads(out_file.read_text(encoding="utf-8"))["certs"]) == 14


def test_pd_bound(capsys) -> None:
    """
    Проверяет pd bound: для r = 4 оценка равна 9.
    """
    code, out = _run(capsys, "pd", "bound", "-r", "4")
    assert code == EXIT_OK
    assert json.loads(out)["lower_bound"] == 9


def test_verify_pretty(capsys) -> None:
    """
    Проверяет verify --pretty: таблица шагов и итог ok=True.
    """
    code, out = _run(capsys, "--pretty", "verify", "-r", "2")
    assert code == EXIT_OK
    assert "ok=True" in out
    assert "Итог self-check" in out


def test_exit_codes(capsys) -> None:
    """
    Проверяет коды выхода.

    Неверный r - 2, превышение лимита ранга - 3, не zero forcing
    множество - 1, отсутствие графа - 2.
    """
    assert main(["gen", "-r", "0"]) == EXIT_USAGE
    assert main(["rank", "-r", "9", "--field", "q"]) == EXIT_RESOURCE
    assert main(["zf", "min"]) == EXIT_USAGE
    assert main(["cert", "show", "-r", "2", "--target", "2"]) == EXIT_USAGE
    with pytest.raises(SystemExit) as info:
        main(["nope"])
    assert info.value.code == 2
    capsys.readouterr()


def test_zf_check_failure(capsys, tmp_path: Path) -> None:
    """
    Проверяет, что не zero forcing множество дает код 1.
    """
    start = tmp_path / "s.txt"
    start.write_text("0\n", encoding="utf-8")
    code, out = _run(capsys, "zf", "check", "-r", "2", "--set", str(start))
    assert code == EXIT_FAILED
    assert json.loads(out)["forcing"] is False


def test_malformed_input_files_are_usage_errors(capsys, tmp_path: Path) -> None:
    """
    Проверяет, что испорченные входные файлы дают код 2, а не трассировку.

    Строка ребра из трех токенов, нечисловой идентификатор в множестве
    и отсутствующий файл.
    """
    graph = tmp_path / "g.txt"
    graph.write_text("3 1\n0 1 2\n", encoding="utf-8")
    start = tmp_path / "s.txt"
    start.write_text("0\n", encoding="utf-8")
    assert main(["zf", "check", "--graph", str(graph), "--set", str(start)]) == EXIT_USAGE
    assert "line 2" in capsys.readouterr().err

    graph.write_text("3 2\n0 1\n1 2\n", encoding="utf-8")
    start.write_text("zero\n", encoding="utf-8")
    assert main(["zf", "check", "--graph", str(graph), "--set", str(start)]) == EXIT_USAGE
    assert "'zero'" in capsys.readouterr().err

    assert main(["pd", "min", "--graph", str(tmp_path / "missing.txt")]) == EXIT_USAGE
    capsys.readouterr()


def test_rank_of_graph_file(capsys, tmp_path: Path) -> None:
    """
    Проверяет rank --graph: ранг матрицы смежности произвольного графа.

    Для C4 ранг над Q и GF(2) равен 2; -r и --graph взаимно исключают друг друга.
    """
    graph = tmp_path / "c4.txt"
    graph.write_text("4 4\n0 1\n0 3\n1 2\n2 3\n", encoding="utf-8")
    for field in ("q", "gf2"):
        code, out = _run(capsys, "rank", "--graph", str(graph), "--field", field)
        assert code == EXIT_OK
        assert json.loads(out) == {"field": field, "rank": 2, "n": 4}
    with pytest.raises(SystemExit) as info:
        main(["rank", "-r", "2", "--graph", str(graph)])
    assert info.value.code == 2
    capsys.readouterr()


def test_zf_closure_writes_trace(capsys, tmp_path: Path) -> None:
    """
    Проверяет zf closure --trace: файл содержит тот же след, что и stdout.
    """
    trace_file = tmp_path / "trace.json"
    code, out = _run(capsys, "zf", "closure", "-r", "2", "--trace", str(trace_file))
    assert code == EXIT_OK
    saved = ForcingTrace.model_validate_json(trace_file.read_text(encoding="utf-8"))
    assert saved.model_dump(mode="json") == json.loads(out)
    assert saved.forcing is True


def test_search_budget_flag(capsys) -> None:
    """
    Проверяет флаг --budget для zf min --pt и pd min.

    Оба поиска перебирают все множества очередного размера, поэтому при
    нулевом бюджете останавливаются с кодом 3 на проверке времени и
    печатают наибольший исключенный размер: 13 для Z(BF(3)) (поиск
    начинается с n - rank = 14) и 3 для power domination (начало с
    ceil(14/4) = 4).
    """
    code, out = _run(capsys, "zf", "min", "-r", "3", "--pt", "--budget", "0")
    assert code == EXIT_RESOURCE
    assert json.loads(out) == {"status": "budget_exhausted", "excluded_size": 13}

    code, out = _run(capsys, "pd", "min", "-r", "3", "--budget", "0")
    assert code == EXIT_RESOURCE
    assert json.loads(out) == {"status": "budget_exhausted", "excluded_size": 3}


def test_pd_min_reports_butterfly_bound(capsys) -> None:
    """
    Проверяет pd min -r 2: нижняя оценка равна ceil(Z/Δ) = 2.
    """
    code, out = _run(capsys, "pd", "min", "-r", "2")
    assert code == EXIT_OK
    payload = json.loads(out)
    assert payload["lower_bound"] == 2
    assert payload["value"] >= 2
