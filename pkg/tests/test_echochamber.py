import io

import numpy as np
import pytest

from creodrift.echochamber import (
    SimParams,
    Simulation,
    graph_from_spec,
    init_population,
    make_graph,
    mean_pairwise_distance,
    parse_sim_config,
    simulate,
    snapshot_diagrams,
    write_drift_csv,
    write_events_csv,
)
from creodrift.errors import GraphGenerationError, InvalidInputError


def small_params(**kw):
    base = dict(vocab_size=12, dim=6, steps=200, utterance_length=4,
                beta=5.0, eta=0.1, global_seed=3, sample_interval=50)
    base.update(kw)
    return SimParams(**base)


class TestGraphs:
    def test_complete_edge_count(self):
        assert len(make_graph("complete", n=4).edges) == 6

    def test_ring_degrees(self):
        g = make_graph("ring", n=5)
        assert len(g.edges) == 5
        degree = [0] * 5
        for i, j, _ in g.edges:
            degree[i] += 1
            degree[j] += 1
        assert degree == [2] * 5

    def test_two_cliques_count(self):
        g = make_graph("two_cliques", a=5, b=5, bridge=1)
        assert len(g.edges) == 10 + 10 + 1

    def test_two_cliques_no_bridge_disconnected(self):
        g = make_graph("two_cliques", a=3, b=3, bridge=0)
        assert all(max(i, j) < 3 or min(i, j) >= 3 for i, j, _ in g.edges)

    def test_erdos_renyi_deterministic(self):
        g1 = make_graph("erdos_renyi", n=12, p=0.4, seed=5)
        g2 = make_graph("erdos_renyi", n=12, p=0.4, seed=5)
        assert g1.edges == g2.edges

    def test_erdos_renyi_unconnectable(self):
        with pytest.raises(GraphGenerationError):
            make_graph("erdos_renyi", n=40, p=1e-6, seed=1)

    def test_custom_graph(self):
        g = make_graph("custom", n=3, edges=[(0, 1, 1.0), (1, 2, 2.0)])
        assert g.n == 3 and len(g.edges) == 2

    def test_validation(self):
        with pytest.raises(InvalidInputError):
            make_graph("custom", n=2, edges=[(0, 0, 1.0)])
        with pytest.raises(InvalidInputError):
            make_graph("custom", n=2, edges=[(0, 1, -1.0)])
        with pytest.raises(InvalidInputError):
            make_graph("no_such_kind", n=3)


class TestInit:
    def test_shared_sigma_zero_identical(self):
        g = make_graph("complete", n=4)
        pop = init_population(g, small_params(init="shared_perturbed", sigma=0.0))
        for learner in pop[1:]:
            assert np.array_equal(learner.representation, pop[0].representation)

    def test_independent_distinct(self):
        g = make_graph("complete", n=2)
        pop = init_population(g, small_params(init="independent"))
        assert not np.array_equal(pop[0].representation, pop[1].representation)

    def test_rows_unit_norm(self):
        g = make_graph("complete", n=3)
        for init in ("independent", "shared_perturbed"):
            pop = init_population(g, small_params(init=init, sigma=0.2))
            for learner in pop:
                norms = np.linalg.norm(learner.representation, axis=1)
                assert np.allclose(norms, 1.0, atol=1e-9)


class TestStep:
    def test_eta_zero_is_exact_noop(self):
        g = make_graph("complete", n=4)
        sim = Simulation(g, small_params(eta=0.0, steps=50))
        before = [l.representation.copy() for l in sim.population]
        for _ in range(50):
            sim.step()
        for b, l in zip(before, sim.population):
            assert np.array_equal(b, l.representation)

    def test_identical_representations_unchanged(self):
        g = make_graph("complete", n=3)
        sim = Simulation(g, small_params(init="shared_perturbed", sigma=0.0))
        before = [l.representation.copy() for l in sim.population]
        for _ in range(30):
            sim.step()
        for b, l in zip(before, sim.population):
            assert np.array_equal(b, l.representation)

    def test_rows_stay_unit_after_many_steps(self):
        g = make_graph("complete", n=5)
        sim = Simulation(g, small_params(steps=300, eta=0.3))
        for _ in range(300):
            sim.step()
        for learner in sim.population:
            assert np.allclose(np.linalg.norm(learner.representation, axis=1), 1.0,
                               atol=1e-9)

    def test_topic_word_dominates_at_large_beta(self):
        # at large beta the utterance is the top-k cosine words, which always
        # include the topic itself (cos = 1)
        g = make_graph("complete", n=2)
        sim = Simulation(g, small_params(beta=200.0, eta=0.0, steps=1000))
        hits = 0
        total = 0
        for _ in range(1000):
            ev = sim.step()
            total += 1
            hits += ev.topic in ev.words
        assert hits / total > 0.99

    def test_event_fields_valid(self):
        g = make_graph("ring", n=5)
        sim = Simulation(g, small_params())
        for _ in range(40):
            ev = sim.step()
            assert ev.speaker != ev.listener
            assert 0 <= ev.topic < 12
            assert all(0 <= w < 12 for w in ev.words)
            assert len(ev.words) == 4


class TestSimulate:
    def test_deterministic(self):
        g = make_graph("complete", n=5)
        p = small_params()
        s1, e1 = simulate(g, p)
        s2, e2 = simulate(g, p)
        assert s1.values == s2.values
        assert e1 == e2

    def test_sigma_zero_series_identically_zero(self):
        g = make_graph("complete", n=4)
        series, _ = simulate(g, small_params(init="shared_perturbed", sigma=0.0))
        assert all(v == 0.0 for v in series.values)

    def test_contraction_on_single_edge(self):
        g = make_graph("custom", n=2, edges=[(0, 1, 1.0)])
        sim = Simulation(g, small_params(steps=400, eta=0.2))
        prev = mean_pairwise_distance(sim.population)
        for _ in range(400):
            sim.step()
        assert mean_pairwise_distance(sim.population) < prev

    def test_per_word_contraction_per_update(self):
        g = make_graph("custom", n=2, edges=[(0, 1, 1.0)])
        sim = Simulation(g, small_params(steps=200, eta=0.15))
        for _ in range(200):
            reps = [l.representation.copy() for l in sim.population]
            ev = sim.step()
            s, l = ev.speaker, ev.listener
            for w in set(ev.words) | {ev.topic}:
                before = np.arccos(np.clip(np.dot(reps[s][w], reps[l][w]), -1, 1))
                after_vecs = (sim.population[s].representation[w],
                              sim.population[l].representation[w])
                after = np.arccos(np.clip(np.dot(*after_vecs), -1, 1))
                assert after <= before + 1e-12

    def test_locality_bit_exact(self):
        # bridgeless cliques: each clique's event stream and states match the
        # run where the other clique's edges simply do not exist
        full_graph = make_graph("two_cliques", a=4, b=4, bridge=0)
        sub_edges = [(i, j, w) for i, j, w in full_graph.edges if min(i, j) >= 4]
        sub_graph = make_graph("custom", n=8, edges=sub_edges)
        p = small_params(steps=300)

        sim_full = Simulation(full_graph, p)
        full_events = [sim_full.step() for _ in range(300)]
        clique_events = [e for e in full_events if e.speaker >= 4]

        sim_sub = Simulation(sub_graph, p)
        sub_events = [sim_sub.step() for _ in range(len(clique_events))]

        def key(e):  # identical up to the global step counter
            return (e.time, e.speaker, e.listener, e.topic, e.words)

        assert [key(e) for e in sub_events] == [key(e) for e in clique_events]
        for i in range(4, 8):
            assert np.array_equal(sim_full.population[i].representation,
                                  sim_sub.population[i].representation)

    def test_convergence_small(self):
        g = make_graph("complete", n=6)
        series, _ = simulate(g, small_params(steps=4000, vocab_size=10, dim=4))
        assert series.values[-1] < 0.5 * series.values[0]

    def test_track_pairs(self):
        g = make_graph("complete", n=3)
        series, _ = simulate(g, small_params(steps=100), track_pairs=True)
        assert set(series.per_pair) == {(0, 1), (0, 2), (1, 2)}
        assert all(len(v) == len(series.steps) for v in series.per_pair.values())


class TestSnapshots:
    def test_identical_learners_zero_bottleneck(self):
        from creodrift.diagram_distance import bottleneck_distance

        g = make_graph("complete", n=3)
        pop = init_population(g, small_params(init="shared_perturbed", sigma=0.0))
        diags = snapshot_diagrams(pop, top_n=12, max_dim=1)
        assert len(diags) == 3
        for dim in (0, 1):
            assert bottleneck_distance(diags[0], diags[1], dim) == 0.0

    def test_independent_learners_positive_dim0_distance(self):
        from creodrift.diagram_distance import bottleneck_distance

        g = make_graph("complete", n=2)
        pop = init_population(g, small_params(init="independent"))
        diags = snapshot_diagrams(pop, top_n=12, max_dim=1)
        assert bottleneck_distance(diags[0], diags[1], 0) > 0.0


class TestConfigAndCsv:
    def test_parse_sim_config(self):
        text = """
        # comment
        graph.kind=two_cliques
        graph.a=5
        graph.b=5
        graph.bridge=1
        vocab_size=20
        dim=8
        steps=500
        eta=0.2
        global_seed=11
        """
        graph_kw, params = parse_sim_config(text)
        g = graph_from_spec(graph_kw)
        assert g.n == 10 and len(g.edges) == 21
        assert params.vocab_size == 20 and params.eta == 0.2 and params.global_seed == 11

    def test_parse_rejects_unknown_key(self):
        with pytest.raises(InvalidInputError):
            parse_sim_config("graph.kind=ring\ngraph.n=5\nwhatever=3")
        with pytest.raises(InvalidInputError):
            parse_sim_config("vocab_size=10")  # missing graph.kind

    def test_csv_outputs(self):
        g = make_graph("complete", n=3)
        series, events = simulate(g, small_params(steps=60))
        buf = io.StringIO()
        write_drift_csv(series, buf)
        lines = buf.getvalue().strip().split("\n")
        assert lines[0] == "step,mean_distance"
        assert len(lines) == 1 + len(series.steps)
        buf2 = io.StringIO()
        write_events_csv(events, buf2)
        assert buf2.getvalue().startswith("step,speaker,listener,topic,words\n")
