"""Unit tests for the Discrepancy module."""
import math
import os
import random
import unittest

import numpy as np

from core.digraph import AlphaError, Alpha1UndefinedError, Digraph, DimensionError, alpha1_valid
from core.discrepancy import (
    SearchConfig,
    brute_search,
    default_grid,
    limit_table,
    max_pair,
    norm_diff,
    parse_grid,
    sweep,
)
from core.gamma import build_gamma, predict_discrepancy
from core.pagerank import build_transition, solve_alpha1, solve_exact, stationarity_residual


LIMIT = math.sqrt(67 / 50)
COARSE_GRID = [round(0.1 * i, 1) for i in range(10)] + [0.99, 1.0]
LONG_TESTS = os.environ.get("PAGERANK_LONG_TESTS") == "1"


class TestNormDiff(unittest.TestCase):
    def test_identity(self):
        pi = [0.2, 0.3, 0.5]
        for p in (1, 2, 3, math.inf):
            self.assertEqual(norm_diff(pi, pi, p), 0.0)

    def test_point_mass_against_uniform(self):
        """e_1 against uniform on the other three entries: sqrt(4/3)."""
        point = [1.0, 0.0, 0.0, 0.0]
        spread = [0.0, 1 / 3, 1 / 3, 1 / 3]
        self.assertAlmostEqual(norm_diff(point, spread, 2), math.sqrt(4 / 3), places=12)
        self.assertAlmostEqual(norm_diff(point, spread, 1), 2.0, places=12)
        self.assertAlmostEqual(norm_diff(point, spread, math.inf), 1.0, places=12)

    def test_general_point_mass(self):
        """sqrt(1 + 1/(n-1)) for every n."""
        for n in range(2, 8):
            point = np.zeros(n)
            point[0] = 1.0
            spread = np.full(n, 1.0 / (n - 1))
            spread[0] = 0.0
            self.assertAlmostEqual(norm_diff(point, spread), math.sqrt(1 + 1 / (n - 1)), places=12)

    def test_stochastic_bounds(self):
        """Distances between stochastic vectors: 1-norm <= 2, 2-norm <= sqrt(2)."""
        rng = random.Random(2)
        for _ in range(100):
            n = rng.randint(1, 8)
            a = np.array([rng.random() for _ in range(n)])
            b = np.array([rng.random() for _ in range(n)])
            a, b = a / a.sum(), b / b.sum()
            self.assertLessEqual(norm_diff(a, b, 1), 2.0 + 1e-12)
            self.assertLessEqual(norm_diff(a, b, 2), math.sqrt(2) + 1e-12)
            self.assertLessEqual(norm_diff(a, b, math.inf), norm_diff(a, b, 2) + 1e-12)

    def test_triangle_inequality(self):
        rng = random.Random(13)
        for _ in range(200):
            n = rng.randint(1, 10)
            a, b, c = (np.array([rng.random() for _ in range(n)]) for _ in range(3))
            for p in (1, 2, 3, math.inf):
                self.assertLessEqual(norm_diff(a, c, p), norm_diff(a, b, p) + norm_diff(b, c, p) + 1e-12)

    def test_ladder_limit(self):
        """Gamma(1000) between alpha = 1 and 0.999 is close to sqrt(67/50)."""
        g, _ = build_gamma(1000)
        self.assertLess(abs(norm_diff(solve_alpha1(g), solve_exact(g, 0.999)) - LIMIT), 0.01)

    def test_rejects_bad_input(self):
        with self.assertRaises(DimensionError):
            norm_diff([1.0], [0.5, 0.5])
        with self.assertRaises(ValueError):
            norm_diff([1.0], [1.0], 0.5)


class TestRandomGraphs(unittest.TestCase):
    def test_pairs_on_random_graphs(self):
        """200 random digraphs with n <= 12 and random alpha pairs respect the norm bounds."""
        rng = random.Random(29)
        for trial in range(200):
            n = rng.randint(1, 12)
            g = Digraph.from_bitmask(n, rng.getrandbits(n * n))
            alphas = [rng.random(), rng.random()]
            if alpha1_valid(g) and rng.random() < 0.3:
                alphas[1] = 1.0
            vectors = []
            for alpha in alphas:
                pi = solve_exact(g, alpha)
                self.assertTrue((pi.values >= 0).all(), trial)
                self.assertAlmostEqual(pi.total(), 1.0, places=12)
                self.assertLessEqual(pi.norm(2), 1.0 + 1e-12)
                self.assertLessEqual(pi.norm(math.inf), 1.0)
                if alpha < 1.0:
                    self.assertLessEqual(stationarity_residual(build_transition(g, alpha), pi), 1e-9)
                vectors.append(pi)
            self.assertLessEqual(norm_diff(vectors[0], vectors[1], 1), 2.0 + 1e-12)
            self.assertLessEqual(norm_diff(vectors[0], vectors[1], 2), math.sqrt(2) + 1e-12)
            self.assertLessEqual(norm_diff(vectors[0], vectors[1], math.inf), 1.0 + 1e-12)
            uniform = solve_exact(g, 0.0)
            np.testing.assert_allclose(uniform.values, np.full(n, 1.0 / n), atol=1e-12)


class TestGrid(unittest.TestCase):
    def test_default_grid(self):
        grid = default_grid()
        self.assertEqual(grid, sorted(grid))
        self.assertEqual(len(grid), 26)
        self.assertEqual(grid[0], 0.0)
        self.assertEqual(grid[-1], 1.0)
        self.assertIn(0.95, grid)
        self.assertIn(0.999999, grid)

    def test_parse_grid(self):
        self.assertEqual(parse_grid("default"), default_grid())
        self.assertEqual(parse_grid("0, 0.5,1"), [0.0, 0.5, 1.0])
        for bad in ("1.5", "a,0.2", "", " , "):
            with self.assertRaises(AlphaError):
                parse_grid(bad)


class TestSweep(unittest.TestCase):
    def test_reference_in_grid(self):
        """The sample at alpha_ref is all zeros."""
        g, _ = build_gamma(5)
        result = sweep(g, 0.5, [0.1, 0.5, 0.9])
        zero = result.samples[1]
        self.assertEqual((zero.d1, zero.d2, zero.dinf), (0.0, 0.0, 0.0))
        self.assertEqual([s.alpha for s in result.samples], [0.1, 0.5, 0.9])

    def test_single_zero_sample(self):
        g = Digraph.from_arcs(3, [(0, 1), (1, 2)])
        result = sweep(g, 0.0, [0.0])
        self.assertEqual(len(result.samples), 1)
        self.assertEqual(result.samples[0].d2, 0.0)

    def test_ladder_boundary_layer(self):
        """d2 climbs toward the limit near 0.999 and collapses at exactly 1."""
        g, _ = build_gamma(1000)
        grid = [round(0.1 * i, 1) for i in range(10)] + [0.99, 0.999, 1.0]
        result = sweep(g, 1.0, grid)
        by_alpha = {s.alpha: s for s in result.samples}
        self.assertEqual(by_alpha[1.0].d2, 0.0)
        self.assertGreater(by_alpha[0.999].d2, 1.1)
        self.assertLess(abs(by_alpha[0.999].d2 - LIMIT), 0.01)
        self.assertEqual(result.peak().alpha, 0.999)

    def test_alpha_one_needs_valid_graph(self):
        with self.assertRaises(Alpha1UndefinedError):
            sweep(Digraph.from_arcs(2, [(0, 1), (1, 0)]), 1.0, [0.5])


class TestMaxPair(unittest.TestCase):
    def test_single_loop(self):
        """pi is always (1), so every pair is at distance 0."""
        record = max_pair(Digraph.from_arcs(1, [(0, 0)]), default_grid())
        self.assertEqual(record.d2, 0.0)
        self.assertLess(record.alpha1, record.alpha2)

    def test_bidirectional_pair(self):
        """pi is (1/2, 1/2) for every alpha < 1; alpha = 1 is excluded."""
        record = max_pair(Digraph.from_arcs(2, [(0, 1), (1, 0)]), default_grid())
        self.assertAlmostEqual(record.d2, 0.0, places=12)
        self.assertLess(record.alpha2, 1.0)

    def test_ladder_best_pair(self):
        """On Gamma(1000) the best grid pair is (1 - 1/k, 1)."""
        k = 1000
        g, _ = build_gamma(k)
        grid = [0.0, 0.5, 0.9, 0.99, 1.0 - 1.0 / k, 1.0]
        record = max_pair(g, grid, refine_rounds=0)
        self.assertEqual((record.alpha1, record.alpha2), (1.0 - 1.0 / k, 1.0))
        self.assertLess(abs(record.d2 - LIMIT), 0.01)
        refined = max_pair(g, grid, refine_rounds=2)
        self.assertGreaterEqual(refined.d2, record.d2)

    def test_grid_order_does_not_matter(self):
        g, _ = build_gamma(6)
        grid = [0.0, 0.3, 0.6, 0.9, 1.0]
        forward = max_pair(g, grid)
        backward = max_pair(g, list(reversed(grid)) + [0.3])
        self.assertEqual((forward.alpha1, forward.alpha2, forward.d2),
                         (backward.alpha1, backward.alpha2, backward.d2))

    def test_record_recomputes(self):
        g, _ = build_gamma(4)
        record = max_pair(g, COARSE_GRID)
        self.assertAlmostEqual(record.recompute(), record.d2, places=9)
        self.assertEqual(record.bitmask, g.bitmask)

    def test_single_alpha(self):
        record = max_pair(build_gamma(2)[0], [0.4])
        self.assertEqual((record.alpha1, record.alpha2, record.d2), (0.4, 0.4, 0.0))

    def test_only_invalid_alpha(self):
        with self.assertRaises(AlphaError):
            max_pair(Digraph.from_arcs(2, [(0, 1), (1, 0)]), [1.0])


class TestLimitTable(unittest.TestCase):
    def test_two_c_limit(self):
        """k = 1000, m = 2 sits near sqrt(67/50), 17/50 and 2/5."""
        row, = limit_table([1000])
        self.assertEqual(row.k, 1000)
        self.assertLess(abs(row.d2 - 1.157583), 0.01)
        self.assertLess(abs(row.norm_sq - 0.34), 0.01)
        self.assertLess(abs(row.pi_C - 0.4), 0.01)
        self.assertLessEqual(row.d1, 2.0)
        self.assertLessEqual(row.dinf, row.d2)

    def test_ladder_nears_other_norm_maxima(self):
        """Gamma(1000) between 0.999 and 1 comes close to d1 = 2 and dinf = 1."""
        row, = limit_table([1000])
        self.assertGreater(row.d1, 1.99)
        self.assertGreater(row.dinf, 0.99)

    def test_single_c_limit(self):
        row, = limit_table([1000], m=1)
        self.assertLess(abs(row.d2 - math.sqrt(4 / 3)), 0.01)

    def test_rows_increase(self):
        """d2 rises along k and stays below the limit at small k."""
        rows = limit_table([2, 10, 100, 1000])
        d2 = [row.d2 for row in rows]
        self.assertLess(d2[0], LIMIT)
        for smaller, larger in zip(d2, d2[1:]):
            self.assertLess(smaller, larger)

    def test_matches_prediction(self):
        """d2 of Gamma(1000, m) sits within 0.02 of f(m) for m = 1, 2, 3."""
        for m in (1, 2, 3):
            row, = limit_table([1000], m=m)
            self.assertLess(abs(row.d2 - predict_discrepancy(m)), 0.02, m)

    def test_rejects_k_one(self):
        for bad in ([1], [2, 0], [2.5]):
            with self.assertRaises(AlphaError):
                limit_table(bad)


class TestBruteSearch(unittest.TestCase):
    def test_single_vertex(self):
        """Both one-vertex graphs give d2 = 0."""
        records = brute_search(1)
        self.assertEqual(len(records), 2)
        for record in records:
            self.assertEqual(record.d2, 0.0)

    def test_two_vertices(self):
        records = brute_search(2, top=5)
        self.assertEqual(len(records), 5)
        self.assertLess(records[0].d2, LIMIT)
        d2 = [round(record.d2, 12) for record in records]
        self.assertEqual(d2, sorted(d2, reverse=True))
        self.assertAlmostEqual(records[0].recompute(), records[0].d2, places=9)

    def test_three_vertices(self):
        """All 512 graphs on three vertices: uniform against a loop sink is the best pair."""
        records = brute_search(3, COARSE_GRID, top=3, refine_rounds=0)
        self.assertEqual([r.bitmask for r in records], ["001001001", "001010010", "001010011"])
        for record in records:
            self.assertEqual((record.alpha1, record.alpha2), (0.0, 1.0))
            self.assertAlmostEqual(record.d2, math.sqrt(2 / 3), places=12)
            self.assertLess(record.d2, LIMIT)
        self.assertAlmostEqual(records[0].recompute(), records[0].d2, places=12)

    def test_workers_do_not_change_ranking(self):
        serial = brute_search(2, COARSE_GRID, top=16, refine_rounds=1, workers=1)
        parallel = brute_search(2, COARSE_GRID, top=16, refine_rounds=1, workers=2)
        self.assertEqual([(r.bitmask, r.alpha1, r.alpha2, r.d2) for r in serial],
                         [(r.bitmask, r.alpha1, r.alpha2, r.d2) for r in parallel])

    def test_size_guards(self):
        with self.assertRaises(ValueError):
            brute_search(5)
        with self.assertRaises(ValueError):
            brute_search(6, allow_large=True)
        with self.assertRaises(ValueError):
            brute_search(0)

    def test_search_config_defaults(self):
        config = SearchConfig()
        self.assertEqual((config.n, config.top, config.workers, config.allow_large), (4, 10, 1, False))

    @unittest.skipUnless(LONG_TESTS, "set PAGERANK_LONG_TESTS=1 to run the 65536-graph search")
    def test_four_vertices(self):
        records = brute_search(4, COARSE_GRID, top=5, refine_rounds=1, workers=os.cpu_count() or 1)
        self.assertEqual(len(records), 5)
        self.assertLess(records[0].d2, LIMIT)


if __name__ == '__main__':
    unittest.main()
