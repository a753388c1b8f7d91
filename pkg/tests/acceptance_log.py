"""Shared record of acceptance lines so the terminal summary can repeat them."""

LINES: list[str] = []


def record(n: int, ok: bool, detail: str) -> str:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}"
    LINES[:] = [x for x in LINES if not x.startswith(f"criterion {n}:")] + [line]
    LINES.sort(key=lambda s: int(s.split()[1].rstrip(":")))
    print(line)
    return line
