"""CLI invocations whose reports are frozen under tests/golden/."""

CASES = {
    "cross_decompose": ["decompose", "--chain", "{data}/cross.jsonl"],
    "cross_decompose_lex": ["decompose", "--chain", "{data}/cross.jsonl", "--algo", "lex"],
    "cross_indecomposable": ["indecomposable", "--chain", "{data}/cross.jsonl"],
    "cross_flatnorm": ["flatnorm", "--chain", "{data}/cross.jsonl", "--margin", "1"],
    "cross_deform": ["deform", "--chain", "{data}/cross.jsonl", "--rho", "2", "--trials", "4"],
    "cross_isoperim": ["isoperim", "--chain", "{data}/cross.jsonl", "--margin", "1"],
    "loop2_decompose": ["decompose", "--chain", "{data}/loop2.jsonl"],
    "loop2_indecomposable": ["indecomposable", "--chain", "{data}/loop2.jsonl"],
    "loop2_flatnorm": ["flatnorm", "--chain", "{data}/loop2.jsonl", "--margin", "1"],
    "loop2_deform": ["deform", "--chain", "{data}/loop2.jsonl", "--rho", "3", "--trials", "4"],
    "loop2_isoperim": ["isoperim", "--chain", "{data}/loop2.jsonl", "--margin", "1"],
    "raster_coarea_check": ["coarea-check", "--raster", "{data}/sign_raster.csv"],
    "raster_bv_decompose": ["bv-decompose", "--raster", "{data}/sign_raster.csv"],
    "samples_make_h": ["make-h", "--samples", "{data}/samples.csv", "--depth", "12"],
    "selftest": ["selftest"],
}


def render(argv, data):
    return [a.format(data=data) for a in argv]


if __name__ == "__main__":
    # regenerate the golden reports: python tests/golden_cases.py
    import contextlib
    import io
    import pathlib

    from flatchain.cli import dispatch

    here = pathlib.Path(__file__).parent
    out = here / "golden"
    out.mkdir(exist_ok=True)
    for name, argv in CASES.items():
        buf = io.StringIO()
        with contextlib.redirect_stdout(buf):
            code = dispatch(render(argv, "tests/data"))
        (out / f"{name}.json").write_text(buf.getvalue())
        print(name, code)
