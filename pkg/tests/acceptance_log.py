"""Collects one pass/fail line per acceptance criterion for the terminal summary."""

ACCEPTANCE = []


def record(criterion, ok, detail):
    ACCEPTANCE.append((criterion, bool(ok), detail))
    print(f"{'PASS' if ok else 'FAIL'}  criterion {criterion}: {detail}")
    return bool(ok)
