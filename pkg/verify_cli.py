import json
import tempfile
import unittest
from pathlib import Path

from typer.testing import CliRunner

from src.cli import app, run
from src.services.finite_field import PrimeField
from src.services.obstruction import verify_triangle
from src.services.parsing import (
    parse_group,
    parse_model,
    parse_model_text,
    parse_monomial,
    parse_rational_function,
    parse_series,
    parse_target_text,
)
from src.services.patch_graph import GroupKind, build_graph
from src.services.reports import Report, ShaReport, Status
from src.utils.errors import EmptyModel, ParseError

F5 = PrimeField(5)

TRIANGLE_JSON = {
    "components": ["X1", "X2", "X3"],
    "points": [
        {"name": "P1", "on": ["X2", "X3"]},
        {"name": "P2", "on": ["X1", "X3"]},
        {"name": "P3", "on": ["X1", "X2"]},
    ],
}
TREE_JSON = {
    "components": ["U1", "U2"],
    "points": [{"name": "P1", "on": ["U1", "U2"]}, {"name": "P2", "on": ["U2"]}],
}


class TestParsing(unittest.TestCase):
    def test_series_literal(self):
        s = parse_series("t^-1 + 2", F5, 4)
        self.assertEqual(s.valuation, -1)
        self.assertEqual(s.coeffs, (1, 2, 0, 0))
        s = parse_series("3*t^2 + t + t", F5, 3)
        self.assertEqual((s.valuation, s.coeffs), (1, (2, 3, 0)))
        self.assertEqual(parse_series(s.to_literal(), F5, 3).coeffs, s.coeffs)

    def test_series_errors_carry_position(self):
        with self.assertRaises(ParseError) as caught:
            parse_series("1 + x", F5)
        self.assertEqual(caught.exception.payload["line"], 1)
        self.assertEqual(caught.exception.payload["column"], 5)
        with self.assertRaises(ParseError):
            parse_series("1 + ", F5)

    def test_monomial_literal(self):
        x = parse_monomial("u:3 e1:1", F5)
        self.assertEqual((x.u, x.e1, x.e2), (3, 1, 0))
        self.assertEqual(parse_monomial(x.to_literal(), F5), x)
        with self.assertRaises(ParseError) as caught:
            parse_monomial("u:3 e3:1", F5)
        self.assertEqual(caught.exception.payload["column"], 5)
        with self.assertRaises(ParseError):
            parse_monomial("u:5", F5)
        with self.assertRaises(ParseError):
            parse_monomial("e1:x", F5)

    def test_model_json(self):
        model = parse_model_text(json.dumps(TRIANGLE_JSON))
        self.assertEqual(len(build_graph(model).vertices), 6)
        with self.assertRaises(ParseError) as caught:
            parse_model_text('{"components": [')
        self.assertEqual(caught.exception.payload["line"], 1)
        with self.assertRaises(ParseError):
            parse_model_text('{"components": ["X1"]}')
        with self.assertRaises(ParseError):
            parse_model_text('{"components": ["X1"], "points": [], "edge_moduli": {"P1:X1": 0}}')
        with self.assertRaises(EmptyModel):
            build_graph(parse_model_text('{"components": [], "points": []}'))

    def test_missing_file(self):
        with self.assertRaises(ParseError):
            parse_model("/nonexistent/model.json")

    def test_target_json(self):
        graph = build_graph(parse_model_text(json.dumps(TRIANGLE_JSON)))
        self.assertEqual(parse_target_text('{"edges": {"P1:X3": 1}}', graph), [0, 1, 0, 0, 0, 0])
        with self.assertRaises(ParseError):
            parse_target_text('{"edges": {"P9:X3": 1}}', graph)

    def test_group(self):
        self.assertEqual(parse_group("sym:3", 2).kind, GroupKind.SYMMETRIC)
        self.assertEqual(parse_group("5", 2).size, 5)
        self.assertEqual(parse_group(None, 4).size, 4)
        with self.assertRaises(ParseError):
            parse_group("dihedral:4", 2)
        with self.assertRaises(ParseError):
            parse_group("zmod:x", 2)

    def test_rational_function(self):
        self.assertEqual(str(parse_rational_function("x*y")), "x*y")
        with self.assertRaises(ParseError):
            parse_rational_function("w + 1")


class TestReports(unittest.TestCase):
    def test_round_trip(self):
        sha = verify_triangle(2, 5)
        report = Report(command="verify-paper triangle", status=Status.INFEASIBLE, payload={"sha": sha.model_dump(mode="json")})
        again = Report.from_json(report.to_json())
        self.assertEqual(again.to_json(), report.to_json())
        self.assertEqual(again.render(), report.render())
        self.assertIn("cokernel: Z/2", report.render())

    def test_sha_report_pairing(self):
        report = ShaReport(
            n=3, edges=["a", "b"], vertices=[], invariant_factors=[3], target=[1, 2], feasible=False, certificate=[1, 1]
        )
        self.assertEqual(report.pairing(), 0)
        self.assertFalse(report.sha_trivial)
        self.assertIn("infeasible", report.render())


class TestCommands(unittest.TestCase):
    def setUp(self):
        self.runner = CliRunner()
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def write(self, name: str, payload) -> str:
        path = Path(self.tmp.name) / name
        path.write_text(payload if isinstance(payload, str) else json.dumps(payload), encoding="utf-8")
        return str(path)

    def invoke_json(self, args):
        result = self.runner.invoke(app, ["--json", *args])
        return result, json.loads(result.stdout)

    def test_ramify(self):
        result = self.runner.invoke(app, ["ramify", "--e", "6", "--ell", "3"])
        self.assertEqual(result.exit_code, 0)
        self.assertEqual(result.stdout.strip(), "2")

    def test_verify_triangle(self):
        result = self.runner.invoke(app, ["verify-paper", "triangle", "--n", "2", "--q", "5"])
        self.assertEqual(result.exit_code, 0)
        self.assertIn("infeasible", result.stdout)
        self.assertIn("Z/2", result.stdout)
        result, payload = self.invoke_json(["verify-paper", "triangle", "--n", "3", "--q", "19"])
        self.assertEqual(result.exit_code, 0)
        self.assertEqual(payload["status"], "infeasible")
        self.assertEqual(payload["payload"]["sha"]["invariant_factors"], [3])

    def test_verify_triangle_incompatible(self):
        result, payload = self.invoke_json(["verify-paper", "triangle", "--n", "2", "--q", "7"])
        self.assertEqual(result.exit_code, 1)
        self.assertEqual(payload["status"], "error")
        self.assertEqual(payload["payload"]["code"], "INCOMPATIBLE_MODULUS")

    def test_verify_multinorm(self):
        result, payload = self.invoke_json(["verify-paper", "multinorm", "--n", "2", "--q", "5"])
        self.assertEqual(result.exit_code, 0)
        self.assertEqual(payload["status"], "infeasible")
        result = self.runner.invoke(app, ["verify-paper", "multinorm", "--n", "2", "--q", "3"])
        self.assertEqual(result.exit_code, 1)

    def test_verify_trees(self):
        result = self.runner.invoke(app, ["--seed", "3", "verify-paper", "trees", "--count", "20", "--max-vertices", "8"])
        self.assertEqual(result.exit_code, 0)
        self.assertIn("seed: 3", result.stdout)

    def test_verify_local_trees(self):
        result, payload = self.invoke_json(
            ["--seed", "4", "verify-paper", "local-trees", "--base", "algebraically_closed", "--n", "4", "--count", "10"]
        )
        self.assertEqual(result.exit_code, 0)
        self.assertEqual(payload["payload"]["seed"], 4)
        self.assertEqual(payload["payload"]["branch_orders"], [1])
        result, payload = self.invoke_json(["verify-paper", "local-trees", "--n", "2", "--q", "5", "--count", "10"])
        self.assertEqual(result.exit_code, 0)
        self.assertEqual(payload["payload"]["base"], "finite")
        result = self.runner.invoke(app, ["verify-paper", "local-trees", "--n", "2"])
        self.assertEqual(result.exit_code, 1)

    def test_global_precision(self):
        result = self.runner.invoke(app, ["--prec", "3", "verify-paper", "triangle", "--n", "2", "--q", "5"])
        self.assertEqual(result.exit_code, 0)
        self.assertIn("Z/2", result.stdout)
        result, payload = self.invoke_json(["--prec", "5", "local-hensel", "--q", "5", "--n", "2", "--z", "1 + t"])
        self.assertEqual(result.exit_code, 0)
        self.assertEqual(payload["payload"]["precision"], 5)

    def test_sha_on_tree(self):
        model = self.write("tree.json", TREE_JSON)
        target = self.write("target.json", {"edges": {"P1:U1": 1, "P2:U2": 1}})
        result, payload = self.invoke_json(["sha", model, "--target", target, "--n", "3"])
        self.assertEqual(result.exit_code, 0)
        self.assertEqual(payload["status"], "ok")
        self.assertTrue(payload["payload"]["sha"]["feasible"])
        self.assertEqual(len(payload["payload"]["sha"]["witness"]), 4)

    def test_sha_check_on_triangle(self):
        model = self.write("triangle.json", TRIANGLE_JSON)
        target = self.write("target.json", {"edges": {"P1:X2": 1}})
        result, payload = self.invoke_json(["sha", model, "--target", target, "--check"])
        self.assertEqual(result.exit_code, 0)
        self.assertEqual(payload["status"], "infeasible")
        self.assertEqual(payload["payload"]["check"], {"image_size": 32, "edge_group_order": 64})

    def test_sha_report_round_trip(self):
        model = self.write("triangle.json", TRIANGLE_JSON)
        result = self.runner.invoke(app, ["--json", "sha", model])
        report = Report.from_json(result.stdout)
        self.assertEqual(report.to_json(), result.stdout.strip())

    def test_malformed_model(self):
        model = self.write("broken.json", '{"components": [')
        result, payload = self.invoke_json(["graph-check", model])
        self.assertEqual(result.exit_code, 1)
        self.assertEqual(payload["payload"]["code"], "PARSE_ERROR")
        self.assertEqual(payload["payload"]["line"], 1)

    def test_graph_check(self):
        model = self.write("triangle.json", TRIANGLE_JSON)
        result, payload = self.invoke_json(["graph-check", model])
        self.assertEqual(result.exit_code, 0)
        self.assertEqual(payload["payload"]["betti_number"], 1)
        self.assertFalse(payload["payload"]["is_tree"])

    def test_graph_factorize(self):
        model = self.write("tree.json", TREE_JSON)
        values = self.write("values.json", {"edges": {"P1:U1": [1, 0, 2], "P1:U2": [2, 1, 0], "P2:U2": [0, 2, 1]}})
        result, payload = self.invoke_json(["graph-factorize", model, "--values", values, "--group", "sym:3"])
        self.assertEqual(result.exit_code, 0)
        self.assertEqual(payload["payload"]["group"], "sym:3")
        self.assertEqual(set(payload["payload"]["vertices"]), {"P1", "P2", "U1", "U2"})

    def test_graph_factorize_needs_tree(self):
        model = self.write("triangle.json", TRIANGLE_JSON)
        values = self.write("values.json", {"edges": {}})
        result = self.runner.invoke(app, ["graph-factorize", model, "--values", values, "--group", "zmod:2"])
        self.assertEqual(result.exit_code, 1)

    def test_local_norm(self):
        result, payload = self.invoke_json(["local-norm", "--q", "5", "--n", "2", "--radicand", "2", "--lam", "t"])
        self.assertEqual(result.exit_code, 0)
        self.assertFalse(payload["payload"]["is_norm"])
        self.assertEqual(payload["payload"]["tame_symbol"], 1)
        self.assertEqual(payload["payload"]["residue_degree"], 2)

    def test_local_hensel(self):
        result, payload = self.invoke_json(["local-hensel", "--q", "5", "--n", "2", "--z", "1 + t", "--prec", "6"])
        self.assertEqual(result.exit_code, 0)
        root = parse_series(payload["payload"]["root"], F5, 6)
        self.assertTrue((root * root).agrees_with(parse_series("1 + t", F5, 6)))

    def test_local_hensel_residue(self):
        result = self.runner.invoke(app, ["local-hensel", "--q", "5", "--n", "2", "--z", "2 + t"])
        self.assertEqual(result.exit_code, 1)

    def test_monomial(self):
        result, payload = self.invoke_json(
            ["monomial", "--q", "5", "--n", "2", "--gens", "u:1 e1:1 e2:0", "--lam", "u:1 e1:1 e2:0"]
        )
        self.assertEqual(result.exit_code, 0)
        self.assertEqual(payload["payload"]["tower"]["degree"], 2)
        self.assertTrue(payload["payload"]["norm"]["is_norm"])

    def test_monomial_dependent(self):
        result = self.runner.invoke(
            app, ["monomial", "--q", "5", "--n", "2", "--gens", "u:1 e1:1", "--gens", "u:4 e1:1"]
        )
        self.assertEqual(result.exit_code, 1)

    def test_run_usage_errors_exit_one(self):
        self.assertEqual(run(["ramify"]), 1)
        self.assertEqual(run(["no-such-command"]), 1)
        self.assertEqual(run(["ramify", "--e", "6", "--ell", "3"]), 0)
        self.assertEqual(run(["verify-paper", "triangle", "--n", "2", "--q", "7"]), 1)


if __name__ == "__main__":
    unittest.main()
