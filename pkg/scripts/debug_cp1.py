"""
Debug script to run the CP1 family through pages, transfer and the Hausdorff diagnostic
"""

import sys
import os
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from fractions import Fraction

from dotenv import load_dotenv
from novarch.algebra.matrix import RELATIVE
from novarch.errors import PerturbationTooLarge
from novarch.models.cp1 import cp1_family, cp1_homology_rank, cp1_limit_view, cp1_model
from novarch.perturbation.perturb import hpt_pipeline
from novarch.spectral.hausdorff import detect_hausdorff_failure
from novarch.spectral.pages import compute_pages

load_dotenv()


def test_truncation(r, N=6):
    """Print pages and the transferred differential of one truncation."""

    print("\n" + "="*50)
    print(f"🔍 CP1 TRUNCATION r={r} N={N}")
    print("="*50 + "\n")

    model = cp1_model(r, N)
    c = model.complex
    print(f"📝 {c!r}")
    print(f"   generators: {', '.join(c.basis.names)}")

    state = compute_pages(c)
    print(f"\n📄 pages computed: {len(state.pages)}")
    print(f"   first nonzero page: {state.first_nonzero_page}")
    print(f"   collapse: {state.collapse}")
    for name, passed in state.checks.items():
        print(f"   {'✅' if passed else '❌'} {name}")

    try:
        result = hpt_pipeline(c)
    except PerturbationTooLarge as exc:
        print(f"\n⚠️ norm lattice refused: {exc}")
        result = hpt_pipeline(c, RELATIVE)
    print(f"\n🔄 transfer ({result.sdr.lattice}): homology {result.sdr.homology.names}, tau {result.tau}")
    view = cp1_limit_view(model, state, result)
    print(f"   edge classes {view.edge}, transferred rank without them {view.transferred_rank}")
    failed = [k for k, v in result.checks.items() if not v]
    if failed:
        print(f"⚠️ failed checks: {', '.join(failed)}")

    return state


def test_hausdorff(r, n_min=6, n_max=12):
    """Track the classes of 1 and x as N grows."""
    print("\n📦 HAUSDORFF DIAGNOSTIC")
    print("-" * 50)

    diagnostic = detect_hausdorff_failure(cp1_family(r), n_max, n_min, 2)
    print(f"verdict: {diagnostic.verdict.value}")
    for track in diagnostic.classes:
        if track.surviving:
            print(f"  {track.name}: val_M {' -> '.join(track.relative_values)}")

    homology = cp1_homology_rank(r)
    print(f"limit rank by quotient norms: {homology.rank}")
    print("-" * 50 + "\n")

    return diagnostic


if __name__ == "__main__":
    for r in (Fraction(3, 5), Fraction(2, 5)):
        test_truncation(r)
        test_hausdorff(r)
