"""Table and figure generation for a saved run: the statistics battery plus SVG views."""
from __future__ import annotations

import csv
import io
import math
from importlib.resources import files
from pathlib import Path

import numpy as np

from .bfi import Phase
from .errors import DegenerateData, InsufficientSamples, MissingPhase, PhaseMismatch, StatsError
from .experiment import RunArtifact, load_run
from .liwc import LiwcDictionary, load_dic, vectorize_corpus
from .ml import LogisticConfig, kfold_cv_accuracy, pca_fit, pca_transform
from .persona import TRAITS
from .stats import cohens_d, correlate_columns, one_way_anova, rank_by_magnitude

BEFORE_AFTER_COLUMNS = ["Group", "Trait", "Mean-B", "Mean-A", "F-Statistic", "p-Value", "Cohen's d"]
ANOVA_COLUMNS = ["Trait", "F-Statistic", "p-Value"]
PB_COLUMNS = ["Rank", "LIWC category", "r_pb"]
SPEARMAN_COLUMNS = ["Trait", "Rank", "Term", "Corr."]
VIOLIN_COLUMNS = ["Trait", "Term", "Corr.", "Top5"]
PCA_COLUMNS = ["agent_id", "group", "pc1", "pc2"]
COMPARE_COLUMNS = ["Group", "Trait", "Mean-B_C", "Mean-A_C", "Mean-A_E", "F-Statistic", "p-Value", "Cohen's d"]

GROUP_NAMES = {1: "creative", 0: "analytical"}
GROUP_COLORS = {1: "#d95f02", 0: "#1b9e77"}
TOP_K = 5
CV_FOLDS = 10


def demo_dictionary_path() -> Path:
    return Path(str(files("persona_lab") / "data" / "demo.dic"))


def resolve_dictionary(path) -> LiwcDictionary:
    if str(path) == "demo":
        path = demo_dictionary_path()
    return load_dic(path)


def fmt(x) -> str:
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".6g")


def _to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _trait_values(art: RunArtifact, phase: Phase, trait, group=None) -> np.ndarray:
    groups = art.group_of()
    return np.array([
        r.scores[trait] for r in art.scores(phase)
        if group is None or groups[r.agent_id] == group
    ], dtype=float)


def _anova_cells(a, b):
    """F, p and d for two samples; undefined statistics become NaN."""
    try:
        res = one_way_anova(a, b)
        f, p = res.statistic, res.p_value
    except (DegenerateData, InsufficientSamples):
        f = p = math.nan
    try:
        d = cohens_d(a, b)
    except DegenerateData:
        d = 0.0 if len(a) and len(b) and np.mean(a) == np.mean(b) else math.nan
    except InsufficientSamples:
        d = math.nan
    return f, p, d


def _require(art: RunArtifact, *phases):
    missing = [p.value for p in phases if p not in art.phases()]
    if missing:
        raise MissingPhase(f"run {art.run_id} has no BFI scores for {', '.join(missing)}")


# ---------------------------------------------------------------- tables


def bfi_anova_table(art: RunArtifact, phase: Phase = Phase.BEFORE_WRITING):
    _require(art, phase)
    rows = []
    for t in TRAITS:
        f, p, _ = _anova_cells(_trait_values(art, phase, t, 0), _trait_values(art, phase, t, 1))
        rows.append([t.value, fmt(f), fmt(p)])
    return ANOVA_COLUMNS, rows


def bfi_before_after_table(art: RunArtifact, after: Phase):
    _require(art, Phase.BEFORE_WRITING, after)
    rows = []
    for g in (0, 1):
        for t in TRAITS:
            b = _trait_values(art, Phase.BEFORE_WRITING, t, g)
            a = _trait_values(art, after, t, g)
            f, p, d = _anova_cells(b, a)
            rows.append([GROUP_NAMES[g], t.value, fmt(np.mean(b) if b.size else math.nan),
                         fmt(np.mean(a) if a.size else math.nan), fmt(f), fmt(p), fmt(d)])
    return BEFORE_AFTER_COLUMNS, rows


def liwc_matrix(art: RunArtifact, dictionary: LiwcDictionary):
    return vectorize_corpus(art.accepted_stories(art.analysis_story_phase()), dictionary, art.group_of())


def pb_table(matrix, k: int = TOP_K):
    pairs = correlate_columns(matrix.labels, matrix.rates, matrix.category_names,
                              method="point_biserial", skip_degenerate=True)
    ranked = rank_by_magnitude(pairs, k)
    return PB_COLUMNS, [[i, name, fmt(r)] for i, (name, r) in enumerate(ranked, 1)]


def spearman_by_trait(art: RunArtifact, matrix, phase: Phase = Phase.BEFORE_WRITING):
    """``{trait: [(category, rho), ...]}`` over agents having both a score and a story."""
    _require(art, phase)
    score_of = {r.agent_id: r.scores for r in art.scores(phase)}
    rows = [i for i, aid in enumerate(matrix.agent_ids) if aid in score_of]
    out = {}
    for t in TRAITS:
        target = [score_of[matrix.agent_ids[i]][t] for i in rows]
        try:
            out[t] = correlate_columns(target, matrix.rates[rows], matrix.category_names,
                                       method="spearman", skip_degenerate=True)
        except StatsError:
            out[t] = []
    return out


def spearman_tables(per_trait, k: int = TOP_K):
    top, violin = [], []
    for t, pairs in per_trait.items():
        ranked = rank_by_magnitude(pairs)
        chosen = {name for name, _ in ranked[:k]}
        top += [[t.value, i, name, fmt(r)] for i, (name, r) in enumerate(ranked[:k], 1)]
        violin += [[t.value, name, fmt(r), int(name in chosen)] for name, r in sorted(pairs)]
    return (SPEARMAN_COLUMNS, top), (VIOLIN_COLUMNS, violin)


def compare_runs(run_a: RunArtifact, run_b: RunArtifact,
                 phase_a: Phase = Phase.AFTER_NONINTERACTIVE,
                 phase_b: Phase = Phase.AFTER_INTERACTIVE):
    """Control (``run_a`` at ``phase_a``) against experimental (``run_b`` at ``phase_b``), per group and trait."""
    if phase_a not in run_a.phases():
        raise PhaseMismatch(f"{run_a.run_id} has no {phase_a.value} scores")
    if phase_b not in run_b.phases():
        raise PhaseMismatch(f"{run_b.run_id} has no {phase_b.value} scores")
    ids_a = sorted(p["id"] for p in run_a.profiles)
    ids_b = sorted(p["id"] for p in run_b.profiles)
    if ids_a != ids_b:
        raise PhaseMismatch(f"runs use different profiles: {ids_a} vs {ids_b}")
    rows = []
    for g in (0, 1):
        for t in TRAITS:
            before = _trait_values(run_a, Phase.BEFORE_WRITING, t, g)
            ctrl = _trait_values(run_a, phase_a, t, g)
            expt = _trait_values(run_b, phase_b, t, g)
            f, p, d = _anova_cells(ctrl, expt)
            rows.append([GROUP_NAMES[g], t.value, fmt(before.mean() if before.size else math.nan),
                         fmt(ctrl.mean() if ctrl.size else math.nan),
                         fmt(expt.mean() if expt.size else math.nan), fmt(f), fmt(p), fmt(d)])
    return COMPARE_COLUMNS, rows


# ---------------------------------------------------------------- SVG


def _svg(width, height, body) -> str:
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">\n'
        f'<rect width="{width}" height="{height}" fill="white"/>\n' + "".join(body) + "</svg>\n"
    )


def _scale(lo, hi, a, b):
    span = (hi - lo) or 1.0
    return lambda v: a + (v - lo) / span * (b - a)


def pca_scatter_svg(coords, labels, ratios, title="LIWC vectors (PCA)") -> str:
    w, h, m = 420, 380, 45
    xs, ys = coords[:, 0], coords[:, 1]
    pad_x = (np.ptp(xs) or 1.0) * 0.05
    pad_y = (np.ptp(ys) or 1.0) * 0.05
    sx = _scale(xs.min() - pad_x, xs.max() + pad_x, m, w - 15)
    sy = _scale(ys.min() - pad_y, ys.max() + pad_y, h - m, 30)
    body = [
        f'<text x="{w / 2:.1f}" y="18" text-anchor="middle">{title}</text>\n',
        f'<line x1="{m}" y1="{h - m}" x2="{w - 15}" y2="{h - m}" stroke="black"/>\n',
        f'<line x1="{m}" y1="30" x2="{m}" y2="{h - m}" stroke="black"/>\n',
        f'<text x="{(m + w - 15) / 2:.1f}" y="{h - 12}" text-anchor="middle">'
        f'PC1 ({100 * ratios[0]:.1f}%)</text>\n',
        f'<text x="14" y="{(30 + h - m) / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 14 {(30 + h - m) / 2:.1f})">PC2 ({100 * ratios[1]:.1f}%)</text>\n',
    ]
    for (x, y), lab in zip(coords, labels):
        body.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="3" fill="{GROUP_COLORS[int(lab)]}" '
                    f'fill-opacity="0.7"/>\n')
    for i, g in enumerate((1, 0)):
        body.append(f'<circle cx="{w - 100}" cy="{40 + 14 * i}" r="4" fill="{GROUP_COLORS[g]}"/>'
                    f'<text x="{w - 92}" y="{44 + 14 * i}">{GROUP_NAMES[g]}</text>\n')
    return _svg(w, h, body)


def _box(body, x, width, values, sy, color):
    q0, q1, q2, q3, q4 = np.percentile(values, [0, 25, 50, 75, 100])
    cx = x + width / 2
    body.append(f'<line x1="{cx:.2f}" y1="{sy(q0):.2f}" x2="{cx:.2f}" y2="{sy(q4):.2f}" stroke="{color}"/>\n')
    body.append(f'<rect x="{x:.2f}" y="{sy(q3):.2f}" width="{width:.2f}" height="{max(sy(q1) - sy(q3), 0.5):.2f}" '
                f'fill="{color}" fill-opacity="0.35" stroke="{color}"/>\n')
    body.append(f'<line x1="{x:.2f}" y1="{sy(q2):.2f}" x2="{x + width:.2f}" y2="{sy(q2):.2f}" '
                f'stroke="{color}" stroke-width="2"/>\n')


def bfi_boxplots_svg(art: RunArtifact, phases) -> str:
    panel_w, h, m = 380, 300, 40
    w = panel_w * len(phases)
    sy = _scale(0, 50, h - m, 30)
    body = []
    for pi, phase in enumerate(phases):
        x0 = pi * panel_w
        body.append(f'<text x="{x0 + panel_w / 2:.1f}" y="18" text-anchor="middle">{phase.value}</text>\n')
        body.append(f'<line x1="{x0 + m}" y1="{h - m}" x2="{x0 + panel_w - 10}" y2="{h - m}" stroke="black"/>\n')
        body.append(f'<line x1="{x0 + m}" y1="30" x2="{x0 + m}" y2="{h - m}" stroke="black"/>\n')
        for tick in range(0, 51, 10):
            body.append(f'<text x="{x0 + m - 4}" y="{sy(tick) + 4:.2f}" text-anchor="end">{tick}</text>\n')
        slot = (panel_w - m - 10) / len(TRAITS)
        for ti, t in enumerate(TRAITS):
            sx = x0 + m + ti * slot
            body.append(f'<text x="{sx + slot / 2:.2f}" y="{h - m + 14}" text-anchor="middle">{t.abbrev}</text>\n')
            for gi, g in enumerate((1, 0)):
                vals = _trait_values(art, phase, t, g)
                if vals.size:
                    _box(body, sx + 4 + gi * (slot - 8) / 2, (slot - 8) / 2 - 2, vals, sy, GROUP_COLORS[g])
    return _svg(w, h, body)


# ---------------------------------------------------------------- driver


def analyze_run(run_dir, dictionary, after_phase: Phase | None = None, seed: int = 0,
                logistic: LogisticConfig | None = None) -> dict[str, str]:
    """Compute every analysis output for a saved run and write them into it.

    Returns ``{relative path: text}`` of what was written.
    """
    run_dir = Path(run_dir)
    art = load_run(run_dir)
    if not isinstance(dictionary, LiwcDictionary):
        dictionary = resolve_dictionary(dictionary)
    if after_phase is None:
        after_phase = Phase.AFTER_NONINTERACTIVE if art.kind == "exp1" else Phase.AFTER_INTERACTIVE
    _require(art, Phase.BEFORE_WRITING, after_phase)
    cfg = logistic or LogisticConfig()
    out: dict[str, str] = {}

    matrix = liwc_matrix(art, dictionary)
    out["liwc_rates.csv"] = matrix.to_csv()
    out["stats/bfi_anova.csv"] = _to_csv(*bfi_anova_table(art))
    out["stats/bfi_before_after.csv"] = _to_csv(*bfi_before_after_table(art, after_phase))
    out["stats/pb_top5.csv"] = _to_csv(*pb_table(matrix))
    top, violin = spearman_tables(spearman_by_trait(art, matrix))
    out["stats/spearman_top5_per_trait.csv"] = _to_csv(*top)
    out["stats/spearman_violin_data.csv"] = _to_csv(*violin)

    n = len(matrix.agent_ids)
    k = min(CV_FOLDS, n)
    try:
        acc = fmt(kfold_cv_accuracy(matrix.rates, matrix.labels, k=k, seed=seed, config=cfg))
    except StatsError as exc:
        acc = f"nan  # {exc}"
    out["stats/cv_accuracy.txt"] = (
        f"{acc}\n# folds={k} seed={seed} n={n} features={matrix.rates.shape[1]} "
        f"l2_lambda={cfg.l2_lambda} tol={cfg.tol} max_iters={cfg.max_iters} "
        f"learning_rate={'auto' if cfg.learning_rate is None else cfg.learning_rate} standardized=True\n"
    )

    pca = pca_fit(matrix.rates, 2, standardize=True, seed=seed)
    coords = pca_transform(pca, matrix.rates)
    out["stats/pca_coords.csv"] = _to_csv(PCA_COLUMNS, [
        [aid, int(lab), fmt(x), fmt(y)] for aid, lab, (x, y) in zip(matrix.agent_ids, matrix.labels, coords)
    ])
    out["stats/pca_scatter.svg"] = pca_scatter_svg(coords, matrix.labels, pca.explained_variance_ratio,
                                                   f"LIWC vectors (PCA), {art.kind}")
    out["stats/bfi_boxplots.svg"] = bfi_boxplots_svg(art, (Phase.BEFORE_WRITING, after_phase))

    for rel, text in out.items():
        path = run_dir / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8", newline="\n")
    return out


def compare_csv(run_a_dir, run_b_dir, phase_a=Phase.AFTER_NONINTERACTIVE, phase_b=Phase.AFTER_INTERACTIVE) -> str:
    return _to_csv(*compare_runs(load_run(run_a_dir), load_run(run_b_dir), Phase(phase_a), Phase(phase_b)))
