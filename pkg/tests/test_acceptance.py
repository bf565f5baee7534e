"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines alongside pytest's own verdicts.
"""

from __future__ import annotations

import random
import time

import pytest

from gear.backends import BagOfWordsEmbedder, ScriptedBackend
from gear.dataset import gen_timezone_dataset
from gear.engine import execute_grounded, ground
from gear.evaluation import grounding_accuracy, run_ablation
from gear.patterns import (
    DEFAULT_FOUR,
    DEFAULT_FOUR_PRIORS,
    PatternProfile,
    PriorDistribution,
    encode,
)
from gear.scoring import ScoreConfig, pattern_score, pattern_score_upper_bound
from gear.tools import ToolRegistry
from gear.arithmetic import ArithmeticError_, eval_arithmetic
from conftest import FnBackend, demo_slm
from oracles import (
    ArithmeticOracleError,
    ast_eval_arithmetic,
    brute_pattern_score,
)
from synthetic import (
    shared_description_library,
    shared_description_records,
    shared_description_slm,
    shared_pattern_library,
    shared_pattern_records,
    shared_pattern_slm,
    synthetic_records,
    synthetic_slm,
)

P4 = DEFAULT_FOUR_PRIORS
LAM1 = ScoreConfig(gamma=0.75, smoothing=1.0)
LAM0 = ScoreConfig(gamma=0.75, smoothing=0.0)


def ok(name: str) -> None:
    print(f"[ACCEPTANCE] {name}: PASS")


def random_profile(rng: random.Random, max_count: int = 6) -> PatternProfile:
    return PatternProfile.from_counts({pid: rng.randrange(max_count) for pid in "efns"})


class TestCriterion01PatternScoreLaws:
    def test_law_suite_10k_pairs_under_5s(self):
        rng = random.Random(97)
        started = time.monotonic()

        # nonnegativity, lambda=0 bound, lambda=0 symmetry, exact length
        # insensitivity, and set-size behavior on 10,000 randomized pairs
        wider_priors = dict(P4.prior)
        m = 3
        wider_priors.update({f"x{i}": 0.01 for i in range(m)})
        wider = PriorDistribution(prior=wider_priors)
        for _ in range(10_000):
            a, b = random_profile(rng), random_profile(rng)
            s1 = pattern_score(a, b, P4, LAM1)
            assert s1 >= 0.0
            s0 = pattern_score(a, b, P4, LAM0)
            assert s0 >= 0.0
            if not b.is_empty:
                assert s0 <= pattern_score_upper_bound(b, P4) + 1e-12
                # k-fold count replication leaves the score exactly unchanged
                k = rng.choice((2, 3, 5))
                kb = PatternProfile.from_counts(
                    {pid: k * c for pid, c in b.counts.items()}
                )
                assert abs(pattern_score(a, kb, P4, LAM1) - s1) <= 1e-12
                assert abs(pattern_score(a, kb, P4, LAM0) - s0) <= 1e-12
            assert abs(pattern_score(b, a, P4, LAM0) - s0) <= 1e-12

            # unused extra patterns: exact at lambda=0, bounded at lambda=1
            assert pattern_score(a, b, wider, LAM0) == s0
            if s1 > 0.0:
                rel = abs(pattern_score(a, b, wider, LAM1) - s1) / s1
                assert rel <= 1.0 * m / (a.total + 1.0 * 4) + 1e-12

        # order insensitivity under token permutation
        vocab = ["pine", "12", "$", "wörter", "3.5", "ok!", "世界", "x9"]
        for _ in range(500):
            tokens = [rng.choice(vocab) for _ in range(rng.randrange(1, 12))]
            shuffled = tokens[:]
            rng.shuffle(shuffled)
            a = encode(" ".join(tokens), DEFAULT_FOUR)
            b = encode("450 cafés!", DEFAULT_FOUR)
            assert pattern_score(
                encode(" ".join(shuffled), DEFAULT_FOUR), b, P4, LAM1
            ) == pattern_score(a, b, P4, LAM1)

        elapsed = time.monotonic() - started
        assert elapsed < 5.0, f"law suite took {elapsed:.2f}s"
        ok(f"pattern-score law suite (10k pairs, {elapsed:.2f}s)")


class TestCriterion02WorkedValues:
    def test_single_term_fixture(self):
        oracle = brute_pattern_score(
            {"e": 2, "s": 1, "n": 1}, {"n": 1}, P4.prior, 1.0, 4
        )
        assert oracle == pytest.approx(0.748933, abs=1e-6)
        got = pattern_score(
            encode("i make $2", DEFAULT_FOUR), encode("450", DEFAULT_FOUR), P4, LAM1
        )
        assert got == pytest.approx(0.748933, abs=1e-6)
        ok("worked value 0.748933")

    def test_two_term_fixture(self):
        oracle = brute_pattern_score({"e": 3}, {"e": 2, "n": 1}, P4.prior, 1.0, 4)
        assert oracle == pytest.approx(0.237306, abs=1e-6)
        got = pattern_score(
            PatternProfile.from_counts({"e": 3}),
            PatternProfile.from_counts({"e": 2, "n": 1}),
            P4,
            LAM1,
        )
        assert got == pytest.approx(0.237306, abs=1e-6)
        ok("worked value 0.237306")


class TestCriterion03PropertyTable:
    def test_table_relations_verbatim(self):
        a = PatternProfile.from_counts({"e": 2, "n": 1})  # "ene"

        # order insensitive: "ene" vs "een" share counts
        b1 = PatternProfile.from_counts({"e": 2, "n": 1})
        b2 = PatternProfile.from_counts({"e": 2, "n": 1})
        assert pattern_score(a, b1, P4, LAM1) == pattern_score(a, b2, P4, LAM1)

        # length insensitive: "en" vs "enenen"
        eee = PatternProfile.from_counts({"e": 3})
        en = PatternProfile.from_counts({"e": 1, "n": 1})
        enenen = PatternProfile.from_counts({"e": 3, "n": 3})
        assert pattern_score(eee, en, P4, LAM1) == pytest.approx(
            pattern_score(eee, enenen, P4, LAM1), abs=1e-12
        )

        # pattern sensitive: "enn" beats "ene" against a = "ene"
        ene = PatternProfile.from_counts({"e": 2, "n": 1})
        enn = PatternProfile.from_counts({"e": 1, "n": 2})
        assert pattern_score(a, ene, P4, LAM1) < pattern_score(a, enn, P4, LAM1)

        # commutative without smoothing: P(ene, eee) = P(eee, ene)
        assert pattern_score(a, eee, P4, LAM0) == pytest.approx(
            pattern_score(eee, a, P4, LAM0), abs=1e-12
        )
        ok("property-table relations")


class TestCriterion04ExecutorFixtures:
    def test_table_outputs_bit_exact(self, tools10):
        assert tools10.execute("Calculator", "2 + 4").text == "6"
        assert tools10.execute("Pow", "2, 3").text == "8"
        assert tools10.execute("Log", "2, 8").text == "3"
        assert tools10.execute(
            "TimezoneConverter",
            '"2022-01-02 22:00:00", "Asia/Shanghai", "America/New_York"',
        ).text == "2022-01-02 09:00:00"
        assert tools10.execute("Sleep", "20", mode="mock").text == "Sleep for 20 seconds"
        assert tools10.execute("RobotMove", "0.3", mode="mock").text == \
            "Robot is moving forward for 0.3 meters"
        ok("executor fixtures bit-exact")


class TestCriterion05CallBudget:
    def test_n_plus_one_slm_zero_llm(self, tools10, patterns7):
        patterns, priors = patterns7
        for n in (1, 4, 10):
            library = ToolRegistry(list(tools10)[:n])
            slm = demo_slm()
            llm = ScriptedBackend([], default="never used")
            ground("2 + 4 = ?", library, slm, BagOfWordsEmbedder(),
                   patterns, priors, LAM1, mock_all=True)
            assert slm.stats.generate_calls == n + 1, f"n={n}"
            assert llm.stats.generate_calls == 0
        ok("call budget: ground() is n+1 SLM / 0 LLM for n in {1,4,10}")

    def test_execution_is_single_llm_call(self, tools10, patterns7):
        patterns, priors = patterns7
        slm, llm = demo_slm(), demo_slm()
        result = ground("2 + 4 = ?", tools10, slm, BagOfWordsEmbedder(),
                        patterns, priors, LAM1, mock_all=True)
        done = execute_grounded("2 + 4 = ?", result, llm, tools10)
        assert llm.stats.generate_calls == 1
        assert done.final_answer == "6"
        ok("call budget: execute_grounded() is exactly 1 LLM call")


class TestCriterion06SideEffectFreedom:
    def test_grounding_with_sleep_60_is_fast(self, tools10, patterns7):
        patterns, priors = patterns7
        started = time.monotonic()
        result = ground("2 + 4 = ?", tools10, demo_slm(), BagOfWordsEmbedder(),
                        patterns, priors, LAM1)
        elapsed = time.monotonic() - started
        sleep_entry = result.per_tool[tools10.index_of("Sleep")]
        assert sleep_entry.api_call.raw_args == "60"
        assert sleep_entry.response.text == "Sleep for 60 seconds"
        assert elapsed < 1.0, f"grounding took {elapsed:.2f}s"
        ok(f"side-effect freedom: Sleep(60) grounding in {elapsed:.3f}s")


class TestCriterion07SyntheticGrounding:
    def run_suite(self, basic4, patterns, priors, concurrency: int):
        embedder = BagOfWordsEmbedder(dimension=4096)
        slm = synthetic_slm()
        outputs = []
        for record in synthetic_records(50):
            result = ground(record.query, basic4, slm, embedder, patterns, priors,
                            LAM1, mock_all=True, max_concurrency=concurrency)
            outputs.append((record.gold_tool, result.to_dict(include_latency=False)))
        return outputs

    def test_200_records_100_percent_deterministic(self, basic4, patterns4):
        patterns, priors = patterns4
        first = self.run_suite(basic4, patterns, priors, concurrency=1)
        assert len(first) == 200
        hits = sum(gold == out["selected_tool"] for gold, out in first)
        assert hits == 200, f"accuracy {hits/200:.3f}"

        rerun = self.run_suite(basic4, patterns, priors, concurrency=1)
        threaded = self.run_suite(basic4, patterns, priors, concurrency=4)
        assert first == rerun, "rerun differs"
        assert first == threaded, "concurrency changes results"
        ok("synthetic 4-tool suite: 200/200, deterministic across reruns and threads")


class TestCriterion08TimezoneTask:
    def test_thousand_records(self, tools10, patterns7):
        patterns, priors = patterns7
        records = gen_timezone_dataset(1000, seed=42)
        by_query = {r.query: r for r in records}
        assert len(by_query) == 1000

        def respond(prompt: str) -> str:
            if "TimezoneConverter API calls" in prompt:
                query = prompt.rsplit("\nInput: ", 1)[-1].removesuffix("\nOutput:")
                record = by_query.get(query)
                if record is None:
                    return "no call"
                meta = record.meta
                return (f'<Q> c <API> [TimezoneConverter("{meta["timestamp"]}", '
                        f'"{meta["from_zone"]}", "{meta["to_zone"]}")].')
            if "API calls" in prompt:
                return "no call"
            record = by_query.get(prompt)
            stamp = record.meta["timestamp"] if record else "12:00:00"
            return f"it is {stamp} there and {stamp} here"

        slm = FnBackend(respond)
        embedder = BagOfWordsEmbedder(dimension=2048)
        results = [
            ground(record.query, tools10, slm, embedder, patterns, priors, LAM1)
            for record in records
        ]
        accuracy = grounding_accuracy(results, records)
        assert accuracy >= 0.95, f"timezone grounding accuracy {accuracy:.3f}"

        for record in records:
            meta = record.meta
            raw = f'"{meta["timestamp"]}", "{meta["from_zone"]}", "{meta["to_zone"]}"'
            assert tools10.execute("TimezoneConverter", raw).text == record.gold_answers[0]
        ok(f"timezone task: accuracy {accuracy:.3f} over 1000 records, gold round-trips")


class TestCriterion09AblationDirectionality:
    def ablation(self, records, library, slm_factory, patterns, priors):
        return run_ablation(
            records, library, slm=slm_factory(), embedder=BagOfWordsEmbedder(dimension=4096),
            patterns=patterns, priors=priors, config=LAM1,
        )

    def test_shared_description_library_needs_patterns(self, patterns4):
        patterns, priors = patterns4
        rows = self.ablation(
            shared_description_records(40), shared_description_library(),
            shared_description_slm, patterns, priors,
        )
        by_label = {row.label: row for row in rows}
        assert by_label["full"].accuracy >= 0.9
        drop = by_label["full"].accuracy - by_label["no_pattern"].accuracy
        assert drop >= 0.30, f"gamma=1.0 only dropped {drop:.2f}"
        ok(f"ablation: no-pattern variant drops {drop:.2f} on shared-description library")

    def test_shared_pattern_library_needs_semantics(self, patterns4):
        patterns, priors = patterns4
        rows = self.ablation(
            shared_pattern_records(40), shared_pattern_library(),
            shared_pattern_slm, patterns, priors,
        )
        by_label = {row.label: row for row in rows}
        assert by_label["full"].accuracy >= 0.9
        drop = by_label["full"].accuracy - by_label["no_semantic"].accuracy
        assert drop >= 0.30, f"gamma=0.0 only dropped {drop:.2f}"
        ok(f"ablation: no-semantic variant drops {drop:.2f} on shared-pattern library")


class TestCriterion10ArithmeticOracle:
    def test_10k_random_expressions_match_ast_oracle(self):
        rng = random.Random(612)

        def expression(depth: int) -> str:
            if depth == 0 or rng.random() < 0.3:
                return str(rng.randrange(0, 100))
            left, right = expression(depth - 1), expression(depth - 1)
            op = rng.choice(["+", "-", "*", "/"])
            text = f"{left} {op} {right}"
            return f"({text})" if rng.random() < 0.5 else text

        checked = 0
        for _ in range(10_000):
            expr = expression(rng.randint(1, 4))
            try:
                expected = ast_eval_arithmetic(expr)
            except ArithmeticOracleError:
                with pytest.raises(ArithmeticError_):
                    eval_arithmetic(expr)
                continue
            assert eval_arithmetic(expr) == expected, expr
            checked += 1
        assert checked > 8000
        ok(f"arithmetic oracle agreement on 10k expressions ({checked} evaluable)")
