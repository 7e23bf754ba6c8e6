"""Cross-check VCD files with an independent parser (vcdvcd).

Every <name>.vcd in the directory is compared against <name>.csv: same
signal set, and the value of each signal after every data row equals what
the VCD reports at that time.
"""
import csv
import pathlib
import sys

from vcdvcd import VCDVCD


def to_int(bits, width):
    if bits in ("x", "X") or "x" in bits.lower():
        return None
    v = int(bits, 2)
    if width == "int16" and v >= 0x8000:
        v -= 0x10000
    return v


def check(vcd_path):
    csv_path = vcd_path.with_suffix(".csv")
    roles, widths = {}, {}
    rows = []
    with open(csv_path, newline="") as f:
        body = []
        for line in f:
            if line.startswith("# signal "):
                _, _, name, width, role = line.split()
                roles[name], widths[name] = role, width
            elif not line.startswith("#"):
                body.append(line)
        for r in csv.DictReader(body):
            rows.append(r)

    data_signals = {n for n, r in roles.items() if r in ("input", "output")}
    vcd = VCDVCD(str(vcd_path))
    refs = {ref.split(".")[-1]: ref for ref in vcd.references_to_ids}
    if set(refs) != data_signals:
        return f"{vcd_path.name}: signal set differs: {sorted(set(refs) ^ data_signals)}"

    errors = 0
    for r in rows:
        if r["annotation"] != "data" or r["signal"] not in data_signals:
            continue
        t, name, value = int(r["time_ns"]), r["signal"], int(r["value"])
        got = to_int(vcd[refs[name]][t], widths[name])
        if got != value:
            errors += 1
            if errors < 5:
                print(f"{vcd_path.name}: {name} at {t}: vcd {got}, csv {value}")
    return f"{vcd_path.name}: {errors} mismatches" if errors else None


def main():
    root = pathlib.Path(sys.argv[1])
    files = sorted(root.glob("*.vcd"))
    if not files:
        print(f"no VCD files under {root}")
        return 1
    failures = [m for m in (check(p) for p in files) if m]
    for m in failures:
        print(m)
    print(f"{len(files) - len(failures)}/{len(files)} VCD files agree with their CSV")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
