from __future__ import annotations

import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.append(str(ROOT))

import networkx as nx
import pytest

from butterfly.core.errors import DomainError
from butterfly.utils.graph import (
    Graph,
    VertexSet,
    closed_neighborhood,
    max_degree,
    open_neighborhood,
    read_edgelist,
    read_vertex_set,
    to_dot,
    write_edgelist,
)


def test_from_edges_collapses_duplicates_and_is_symmetric() -> None:
    """
    Проверяет построение графа из списка ребер.

    Повторные ребра (в том числе записанные в обратном порядке)
    схлопываются, матрица смежности симметрична.
    """
    g = Graph.from_edges(3, [(0, 1), (1, 0), (1, 2), (0, 1)])
    assert g.edge_count == 2
    assert g.adjacency == ((1,), (0, 2), (1,))
    assert all(u in g.adjacency[v] for u in range(3) for v in g.adjacency[u])


@pytest.mark.parametrize("edges", [[(0, 0)], [(0, 3)], [(-1, 1)]])
def test_from_edges_rejects_bad_edges(edges) -> None:
    """
    Проверяет отказ на петлях и вершинах вне диапазона.

    Оба случая сообщаются как DomainError.
    """
    with pytest.raises(DomainError):
        Graph.from_edges(3, edges)


def test_neighborhoods() -> None:
    """
    Проверяет открытую и замкнутую окрестности.

    N[{v}] совпадает с N(v) вместе с самой вершиной v.
    """
    g = Graph.from_networkx(nx.path_graph(5))
    for v in range(5):
        single = VertexSet.from_ids(5, [v])
        assert closed_neighborhood(g, single) == open_neighborhood(g, v) | single
    assert closed_neighborhood(g, VertexSet.from_ids(5, [0, 4])).ids() == (0, 1, 3, 4)
    with pytest.raises(DomainError):
        open_neighborhood(g, 5)


def test_max_degree() -> None:
    """
    Проверяет максимальную степень.

    Для звезды K_{1,4} это 4, для пустого графа операция не определена.
    """
    assert max_degree(Graph.from_networkx(nx.star_graph(4))) == 4
    with pytest.raises(DomainError):
        max_degree(Graph.from_edges(0, []))


def test_edgelist_text_format() -> None:
    """
    Проверяет формат списка ребер.

    Первая строка "n m", далее ребра u < v по возрастанию; чтение
    восстанавливает тот же граф, неверный заголовок отклоняется.
    """
    g = Graph.from_networkx(nx.cycle_graph(4))
    text = write_edgelist(g)
    assert text.splitlines() == ["4 4", "0 1", "0 3", "1 2", "2 3"]
    assert read_edgelist(text).adjacency == g.adjacency
    with pytest.raises(DomainError):
        read_edgelist("4 5\n0 1\n")


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("3 1\n0 1 2\n", "line 2"),
        ("3 1\n0 x\n", "'x'"),
        ("three 0\n", "line 1"),
    ],
)
def test_read_edgelist_rejects_malformed_lines(text: str, fragment: str) -> None:
    """
    Проверяет разбор испорченного списка ребер.

    Лишний токен в строке или нечисловой идентификатор дают DomainError
    с номером строки или самим токеном в сообщении.
    """
    with pytest.raises(DomainError, match=fragment):
        read_edgelist(text)


def test_vertex_set_algebra() -> None:
    """
    Проверяет операции над множествами вершин.

    Объединение, пересечение, разность и включение работают поверх
    булевой маски; множества над разными n не смешиваются.
    """
    a = VertexSet.from_ids(6, [0, 1, 2])
    b = VertexSet.from_ids(6, [2, 3])
    assert (a | b).ids() == (0, 1, 2, 3)
    assert (a & b).ids() == (2,)
    assert (a - b).ids() == (0, 1)
    assert (a & b).issubset(a)
    assert len(a.complement()) == 3
    assert 1 in a and 5 not in a
    assert hash(a) == hash(VertexSet.from_ids(6, [2, 1, 0]))
    with pytest.raises(DomainError):
        a | VertexSet.empty(5)
    with pytest.raises(DomainError):
        VertexSet.from_ids(3, [3])


def test_read_vertex_set_and_dot() -> None:
    """
    Проверяет чтение множества вершин и экспорт в DOT.

    Разделители - пробелы и запятые; выделенные вершины закрашены.
    """
    g = Graph.from_networkx(nx.path_graph(3))
    s = read_vertex_set(3, "0, 2\n")
    assert s.ids() == (0, 2)
    dot = to_dot(g, highlight=s)
    assert "0 -- 1;" in dot and "1 -- 2;" in dot
    assert dot.count("style=filled") == 2
    with pytest.raises(DomainError, match="'zero'"):
        read_vertex_set(3, "0 zero")


def test_networkx_round_trip_is_isomorphic() -> None:
    """
    Проверяет конвертацию в networkx и обратно.

    Граф Петерсена после двух преобразований изоморфен исходному.
    """
    petersen = nx.petersen_graph()
    g = Graph.from_networkx(petersen)
    assert g.edge_count == 15
    assert nx.is_isomorphic(g.to_networkx(), petersen)
