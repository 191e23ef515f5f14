"""
Unit tests for the snippet tokenizer.
"""

import time

import pytest

from patch_rank.core.tokenizer import normalize_whitespace, tokenize, tokenize_text


class TestTokenize:
    """Tests for tokenize."""

    def test_member_chain_and_punctuation(self):
        tokenize("warm up")
        start = time.perf_counter()
        tokens = tokenize("function foo () { return this.bar; }").tokens
        assert time.perf_counter() - start < 0.001
        assert tokens == (
            "function",
            "foo",
            "(",
            ")",
            "{",
            "return",
            "this.bar",
            ";",
            "}",
        )

    def test_operator_characters_are_separate(self):
        assert tokenize_text('if (name === "Math")') == [
            "if",
            "(",
            "name",
            "=",
            "=",
            "=",
            '"Math"',
            ")",
        ]

    def test_empty_input(self):
        assert tokenize("").tokens == ()
        assert tokenize("  \n\t ").tokens == ()

    def test_doc_id_is_carried(self):
        assert tokenize("a", doc_id="bug/original").doc_id == "bug/original"

    def test_numbers(self):
        assert tokenize_text("x = 1.5 + 20;") == ["x", "=", "1.5", "+", "20", ";"]

    def test_long_member_chain(self):
        assert tokenize_text("context.report(node)") == ["context.report", "(", "node", ")"]

    def test_string_literal_whitespace_is_dropped(self):
        assert tokenize_text("s = 'a b';") == ["s", "=", "'ab'", ";"]

    def test_escaped_quote_in_string(self):
        assert tokenize_text(r'"a\"b"') == [r'"a\"b"']

    def test_unterminated_string(self):
        assert tokenize_text('x = "ab') == ["x", "=", '"', "a", "b"]

    def test_strings_do_not_span_lines(self):
        assert tokenize_text('"a\nb"') == ['"', "a", "b", '"']

    @pytest.mark.parametrize(
        "text",
        [
            "function foo () { return this.bar; }",
            'if (node.callee.name === "Math") {\n    report(node);\n}',
            "var s = 'multi  word  string';\r\nx++;",
            'broken = "never closed\nnext();',
            "a.b.c.d(1.25, $el, _x)",
        ],
    )
    def test_tokens_concatenate_to_stripped_text(self, text):
        assert "".join(tokenize_text(text)) == normalize_whitespace(text)

    @pytest.mark.parametrize("text", ["a  b", "x\t=\ty", 'f("a b")'])
    def test_no_token_has_whitespace(self, text):
        assert all(not any(c.isspace() for c in t) for t in tokenize_text(text))


class TestNormalizeWhitespace:
    """Tests for normalize_whitespace."""

    def test_removes_all_whitespace(self):
        assert normalize_whitespace("  a +\n\tb ;\r\n") == "a+b;"

    def test_equal_modulo_whitespace(self):
        assert normalize_whitespace("return x+y;") == normalize_whitespace("return  x + y ;")

    def test_empty(self):
        assert normalize_whitespace("") == ""

    def test_collapses_runs(self):
        assert normalize_whitespace("column:   0") == "column:0"

    def test_developer_fix_matches_compact_candidate(self):
        assert normalize_whitespace("column: 0") == normalize_whitespace("column:0")

    @pytest.mark.parametrize(
        "text",
        ["", "column:   0", "  a +\n\tb ;\r\n", "if (a) {\n    b();\n}", "ab"],
    )
    def test_idempotent(self, text):
        once = normalize_whitespace(text)
        assert normalize_whitespace(once) == once
