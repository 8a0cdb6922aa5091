import random
from itertools import combinations

from conftest import make_paper, random_corpus
from bibmetrics.graph import build_graph, degree_stats


def edge_map(g):
    labels = g.labels()
    return {tuple(sorted((labels[e.u], labels[e.v]))): e.weight for e in g.edges}


class TestBuildGraph:
    def test_pair_weights_count_shared_papers(self):
        papers = [
            make_paper(0, 2020, ["A", "B"]),
            make_paper(1, 2020, ["A", "B"]),
            make_paper(2, 2021, ["A", "C"]),
        ]
        g = build_graph(papers, "author")
        assert edge_map(g) == {("A", "B"): 2, ("A", "C"): 1}
        assert next(n for n in g.nodes if n.label == "A").papers == 3

    def test_single_author_paper_has_node_no_edges(self):
        g = build_graph([make_paper(0, 2020, ["Solo"])], "author")
        assert g.n == 1 and g.m == 0

    def test_repeated_institution_no_self_loop(self):
        paper = make_paper(0, 2020, ["A"], institutions=["X", "X"], countries=["USA", "USA"])
        g = build_graph([paper], "institution")
        assert g.n == 1 and g.m == 0
        assert g.nodes[0].papers == 1

    def test_citations_accumulate_per_entity(self):
        papers = [
            make_paper(0, 2020, ["A"], times_cited=10),
            make_paper(1, 2021, ["A", "B"], times_cited=5),
        ]
        g = build_graph(papers, "author")
        by_label = {n.label: n for n in g.nodes}
        assert by_label["A"].citations == 15
        assert by_label["B"].citations == 5

    def test_country_graph_uses_affiliations(self):
        paper = make_paper(
            0, 2020, ["A"], institutions=["X", "Y"], countries=["USA", "Canada"]
        )
        g = build_graph([paper], "country")
        assert edge_map(g) == {("Canada", "USA"): 1}

    def test_edge_weight_sum_identity(self):
        rng = random.Random(5)
        for _ in range(30):
            papers = random_corpus(rng, rng.randint(1, 40))
            g = build_graph(papers, "author")
            expected = sum(
                len(list(combinations(set(p.authors), 2))) for p in papers
            )
            assert sum(e.weight for e in g.edges) == expected

    def test_permutation_invariance(self):
        rng = random.Random(7)
        papers = random_corpus(rng, 30)
        g1 = build_graph(papers, "author")
        shuffled = papers[:]
        rng.shuffle(shuffled)
        g2 = build_graph(shuffled, "author")
        assert edge_map(g1) == edge_map(g2)
        assert {(n.label, n.papers, n.citations) for n in g1.nodes} == {
            (n.label, n.papers, n.citations) for n in g2.nodes
        }


class TestDegreeStats:
    def test_triangle(self):
        papers = [make_paper(0, 2020, ["A", "B", "C"])]
        g = build_graph(papers, "author")
        assert degree_stats(g) == [(2, 2), (2, 2), (2, 2)]

    def test_isolated_node(self):
        g = build_graph([make_paper(0, 2020, ["A"])], "author")
        assert degree_stats(g) == [(0, 0)]

    def test_star_center(self):
        papers = [make_paper(i, 2020, ["Hub", f"Leaf{i}"]) for i in range(4)]
        g = build_graph(papers, "author")
        hub_index = g.labels().index("Hub")
        assert degree_stats(g)[hub_index] == (4, 4)

    def test_handshake_identity(self):
        rng = random.Random(9)
        for _ in range(20):
            g = build_graph(random_corpus(rng, rng.randint(1, 30)), "author")
            degrees = [d for d, _ in degree_stats(g)]
            assert sum(degrees) == 2 * g.m
