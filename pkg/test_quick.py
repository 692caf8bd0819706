#!/usr/bin/env python3
"""
Quick Test Script
Smoke-check the fixtures end to end without pytest
"""

import sys
import os

# Fix Windows console encoding
if sys.platform == "win32":
    os.system("chcp 65001 > nul 2>&1")
    sys.stdout.reconfigure(encoding='utf-8')

from rich.console import Console

from modules import (
    CriticalRelation,
    OrbitModel,
    RatMap,
    build_proper,
    certify,
    critical_set,
    degeneracy_demo,
    jacobian,
    load_spec,
)

console = Console(force_terminal=True)


def check_chebyshev():
    """Relation detection and certificate for z^2 - 2"""
    console.print("\n[bold cyan]Testing z² - 2...[/bold cyan]")

    try:
        f = RatMap.polynomial((-2, 0, 1))
        crit = critical_set(f)
        collection = build_proper(OrbitModel.numeric(f, crit=crit))
        console.print(f"[green]✓[/green] Critical points: {crit.nu}, relations: {collection.relations}")

        entry = jacobian(f, [CriticalRelation(1, 1, 3, 2)], 'family:num0').matrix[0, 0]
        console.print(f"  dR/dc = {entry:.6f} (expected -8)")
        if abs(entry + 8) > 1e-6:
            return False

        result = certify(f, collection, 'poly')
        console.print(f"  Certified: {result.certified}, rank {result.report.certified_rank}")
        return result.certified

    except Exception as e:
        console.print(f"[red]✗ Error:[/red] {e}")
        return False


def check_fig1():
    """Proper collection of the nine point orbit diagram"""
    console.print("\n[bold cyan]Testing symbolic orbit model...[/bold cyan]")

    try:
        model = load_spec('fig1').model()
        collection = build_proper(model)
        console.print(f"[green]✓[/green] {len(collection)} relations, ζ = {collection.zeta}")
        for rel in collection:
            console.print(f"  {rel}")
        return len(collection) == 6 and collection.zeta == 3

    except Exception as e:
        console.print(f"[red]✗ Error:[/red] {e}")
        return False


def check_lattes():
    """Rank drop and invariant differential of a flexible Lattès map"""
    console.print("\n[bold cyan]Testing Lattès degeneracy...[/bold cyan]")

    try:
        report = degeneracy_demo(2 + 0.5j, seed=0)
        console.print(f"[green]✓[/green] Rank {report.jacobian.certified_rank} of {len(report.relations)}")
        console.print(f"  Invariance residual: {report.invariance_residual:.2e}")
        console.print(f"  Family residual: {report.family_residual:.2e}")
        return report.passed and report.jacobian.certified_rank == 5

    except Exception as e:
        console.print(f"[red]✗ Error:[/red] {e}")
        return False


def main():
    console.print("\n[bold]🧪 Transversal - Quick Tests[/bold]\n")

    results = []

    # Test 1: Quadratic Chebyshev polynomial
    results.append(("Chebyshev", check_chebyshev()))

    # Test 2: Symbolic orbit model
    results.append(("Orbit model", check_fig1()))

    # Test 3: Lattès map
    results.append(("Lattès", check_lattes()))

    # Summary
    console.print("\n[bold cyan]Test Summary[/bold cyan]")
    passed = sum(1 for _, result in results if result)
    total = len(results)

    for name, result in results:
        status = "[green]✓ PASS[/green]" if result else "[red]✗ FAIL[/red]"
        console.print(f"  {status} - {name}")

    console.print(f"\n[bold]Results: {passed}/{total} tests passed[/bold]")

    if passed == total:
        console.print("[bold green]All tests passed! ✓[/bold green]")
        console.print("\n[yellow]Next step:[/yellow] Run the full suite:")
        console.print("  pytest -q")
    else:
        console.print("[bold red]Some tests failed![/bold red]")
        sys.exit(1)


if __name__ == "__main__":
    main()
