#!/usr/bin/env python3
"""Independent reference computations for the golden values frozen in tests/.

Each oracle avoids the closed forms used by the library: powers are repeated
multiplication, allreduce traffic is enumerated phase by phase, and standard
deviations are summed by hand.
"""

import math
from fractions import Fraction


def power(base, n):
    out = 1.0
    for _ in range(n):
        out *= base
    return out


def ring_allreduce_bytes(message, p):
    """Per-participant bytes: p-1 reduce-scatter steps then p-1 allgather
    steps, each moving one chunk of message/p."""
    if p == 1:
        return 0.0
    chunk = message / p
    sent = 0.0
    for _ in range(p - 1):
        sent += chunk
    for _ in range(p - 1):
        sent += chunk
    return sent


def pstdev(xs):
    m = sum(xs) / len(xs)
    return math.sqrt(sum((x - m) ** 2 for x in xs) / len(xs)), m


def bisect_quality(flops, vflops, target, n):
    lo, hi = 0.0, 2 * target
    for _ in range(200):
        mid = (lo + hi) / 2
        if flops * power(mid / target, n) < vflops:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def main():
    print("penalty 0.9^10", power(0.9, 10))
    print("penalty 0.99^5", power(0.99, 5))
    q = bisect_quality(939e12, 642e12, 0.763, 5)
    print("implied quality", q, "penalty", power(q / 0.763, 5))
    print("vflops with implied q", 939e12 * power(q / 0.763, 5))
    print("vflops/W", 642e12 / 1e5)
    print("throughput EWA", 46 / 8 * 8 * 691e9)
    print("throughput IC", 328 * 8 * 22.1e9)
    print("fps EWA", 345.66e12 / 500, "fps IC", 2877.06e12 / 12800, "with 128000", 2877.06e12 / 128000)
    print("profile 1e12/4", 1e12 / 4)
    print("ratio EWA", round((691e9 / 1e9) / (41e6 / 1e6), 2), "IC", round((2944e9 / 1e9) / (25e6 / 1e6), 2))
    print("efficiency", Fraction(182, 100) / Fraction(16, 8))
    print("ridge single", 120e12 / 300e9, "distributed", 8320e12 / 1.2e9)
    for p in (16, 32, 64, 10**6):
        ewa = p * 691e9 / (p * ring_allreduce_bytes(164e6, p))
        ic = p * 2944e9 / (p * ring_allreduce_bytes(100e6, p))
        print(f"coi p={p} ewa {ewa:.4f} ic {ic:.4f}")
    print("ridge 2 nodes mixed nvlink", 2 * 8 * 130e12 / 300e9, "4 nodes", 4 * 8 * 130e12 / 300e9)
    ewa16 = 16 * 691e9 / (16 * ring_allreduce_bytes(164e6, 16))
    print("EWA bound nvlink", 300e9 * ewa16, "compressed", 300e9 * 2 * ewa16)
    print("bound at coi 400", min(120e12, 300e9 * 400), "coi 100", min(120e12, 300e9 * 100))
    print("ring 100MB p=4 per", ring_allreduce_bytes(100e6, 4), "time 1GB/s", ring_allreduce_bytes(100e6, 4) / 1e9)
    print("ring 164MB p=64 total", 64 * ring_allreduce_bytes(164e6, 64))
    print("step blend", 0.5 * max(0.1, 0.05) + 0.5 * 0.15)
    print("lr ramp end", 0.1 * 32)
    xs = [10, 12, 11, 13, 11]
    kept = sorted(xs)[1:-1]
    print("aggregate kept", kept, "mean", sum(kept) / len(kept))
    sd, m = pstdev([10, 12])
    print("variation {10,12}", sd / m)
    for base, gain in ((0.763, 0.0045), (0.720, 0.0138)):
        print("bn ratio", base, gain, power((base + gain) / base, 5))


if __name__ == "__main__":
    main()
