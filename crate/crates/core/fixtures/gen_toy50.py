#!/usr/bin/env python3
"""Regenerate toy50.jsonl: 50 deterministic focal-method/test-case pairs.

Ten method families, five variants each.  Every method and test name is
unique, and variants within a family differ structurally — different
identifiers, literals, guards and operators — so each of the 100 units is
separable from every other and a small model can memorize the corpus.
"""

import json
import pathlib

# Per-variant identifier palettes keep terminal values disjoint between
# variants of the same family.
IDS = [
    ("a", "b", "c"),
    ("p", "q", "r"),
    ("x", "y", "z"),
    ("m", "n", "k"),
    ("u", "v", "w"),
]
LOCALS = ["res", "out", "got", "val", "acc"]
CALLS = ["assertEquals", "checkEquals", "verifyEquals", "expectEquals", "mustEqual"]


def pairs():
    for v in range(5):
        i1, i2, i3 = IDS[v]
        loc = LOCALS[v]
        chk = CALLS[v]
        k = v + 2

        yield (
            f"int add{v}(int {i1}, int {i2}) {{ int {i3} = {i1} + {i2} + {v}; return {i3}; }}",
            f"void testAdd{v}() {{ int {loc} = add{v}(3, {k}); {chk}({3 + k + v}, {loc}); }}",
        )
        guard = f"if ({i1} == {i2}) {{ return {v}; }} " if v % 2 == 0 else ""
        yield (
            f"int max{v}(int {i1}, int {i2}) {{ {guard}if ({i1} > {i2}) {{ return {i1}; }} return {i2}; }}",
            f"void testMax{v}() {{ int {loc} = max{v}({9 + v}, 2); {chk}({9 + v}, {loc}); }}",
        )
        step = f"{i2}++" if v % 2 == 0 else f"{i2} = {i2} + 1"
        yield (
            f"int sumTo{v}(int {i1}) {{ int {i3} = {v}; for (int {i2} = 0; {i2} < {i1}; {step}) {{ {i3} = {i3} + {i2}; }} return {i3}; }}",
            f"void testSumTo{v}() {{ int {loc} = sumTo{v}(4); {chk}({6 + v}, {loc}); }}",
        )
        yield (
            f"int count{v}(int {i1}) {{ int {i3} = 0; while ({i1} > {v}) {{ {i1} = {i1} - {k}; {i3}++; }} return {i3}; }}",
            f"void testCount{v}() {{ int {loc} = count{v}({20 + v}); {chk}({(20 + v - v + k - 1) // k}, {loc}); }}",
        )
        yield (
            f'String greet{v}(String {i1}) {{ String {i3} = "hi{v} " + {i1} + "!"; return {i3}; }}',
            f'void testGreet{v}() {{ String {loc} = greet{v}("bob{v}"); {chk}("hi{v} bob{v}!", {loc}); }}',
        )
        yield (
            f"boolean isEven{v}(int {i1}) {{ boolean {i3} = {i1} % 2 == {v % 2}; return {i3}; }}",
            f"void testIsEven{v}() {{ boolean {loc} = isEven{v}({6 + v}); assertTrue{v}({loc}); }}",
        )
        flip = f"0 - {i1}" if v % 2 == 0 else f"-{i1}"
        yield (
            f"int abs{v}(int {i1}) {{ if ({i1} < {v}) {{ return {flip}; }} return {i1} + {v}; }}",
            f"void testAbs{v}() {{ int {loc} = abs{v}(-{5 + v}); {chk}({5 + v}, {loc}); }}",
        )
        yield (
            f"int clamp{v}(int {i1}, int {i2}, int {i3}) {{ if ({i1} < {i2}) {{ return {i2} * {k}; }} if ({i1} > {i3}) {{ return {i3}; }} return {i1}; }}",
            f"void testClamp{v}() {{ int {loc} = clamp{v}({5 + v}, 0, 10); {chk}({5 + v}, {loc}); }}",
        )
        yield (
            f"int pow{v}(int {i1}, int {i2}) {{ int {i3} = 1; int {loc} = 0; while ({loc} < {i2}) {{ {i3} = {i3} * {i1}; {loc} = {loc} + 1; }} return {i3} + {v}; }}",
            f"void testPow{v}() {{ int {loc} = pow{v}(2, {v + 1}); {chk}({2 ** (v + 1) + v}, {loc}); }}",
        )
        tail = f"do {{ {i3} = {i3} - 1; }} while ({i3} > {100 + v});" if v % 2 == 1 else ""
        yield (
            f"int scale{v}(int {i1}) {{ int {i3} = {i1} * {k} + {v}; {tail} return {i3}; }}",
            f"void testScale{v}() {{ int {loc} = scale{v}({3 + v}); {chk}({loc}, scale{v}({3 + v})); }}",
        )


def main():
    out = pathlib.Path(__file__).with_name("toy50.jsonl")
    lines = []
    for idx, (method, test) in enumerate(pairs()):
        lines.append(
            json.dumps(
                {"id": f"p{idx:03}", "focal_method": method, "test_case": test},
                ensure_ascii=True,
            )
        )
    assert len(lines) == 50, len(lines)
    out.write_text("\n".join(lines) + "\n")
    print(f"wrote {out} ({len(lines)} pairs)")


if __name__ == "__main__":
    main()
