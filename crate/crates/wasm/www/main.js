import init, { distance_table, rectify_ranked, perturb_expr, sample_lexicon } from "./pkg/rsst_wasm.js";

const $ = (id) => document.getElementById(id);
let trial = 0n;

function fail(el, e) {
  el.innerHTML = `<span class="err">${e}</span>`;
}

function renderDistance() {
  const alpha = parseFloat($("alpha").value);
  const beta = parseFloat($("beta").value);
  $("alpha-v").textContent = alpha;
  $("beta-v").textContent = beta;
  let view;
  try {
    view = JSON.parse(distance_table($("dist-a").value, $("dist-b").value, alpha, beta));
  } catch (e) {
    fail($("dist-summary"), e);
    $("dist-table").innerHTML = "";
    return;
  }
  $("dist-summary").textContent =
    `D_tree = ${view.d_tree}   D_stroke = ${view.d_stroke}   D′ = ${view.d_combined}`;
  const { rows, cols, cells } = view.table;
  const head = (e) => `${e.token}<br><small>w=${e.weight}</small>`;
  let html = "<table class='dp'><tr><th></th><th>∅</th>";
  html += view.elements_b.map((e) => `<th>${head(e)}</th>`).join("") + "</tr>";
  for (let i = 0; i < rows; i++) {
    html += `<tr><th>${i === 0 ? "∅" : head(view.elements_a[i - 1])}</th>`;
    for (let j = 0; j < cols; j++) {
      const last = i === rows - 1 && j === cols - 1;
      html += `<td class="${last ? "final" : ""}">${+cells[i * cols + j].toFixed(4)}</td>`;
    }
    html += "</tr>";
  }
  $("dist-table").innerHTML = html + "</table>";
}

function renderRectify() {
  const alpha = parseFloat($("alpha").value);
  const beta = parseFloat($("beta").value);
  let view;
  try {
    view = JSON.parse(rectify_ranked($("rect-q").value, $("rect-lex").value, alpha, beta, parseInt($("rect-k").value, 10) || 8));
  } catch (e) {
    fail($("rect-summary"), e);
    $("rect-list").innerHTML = "";
    return;
  }
  $("rect-summary").textContent = view.exact_match
    ? `exact match → ${view.candidates.join(", ")}`
    : `rectified to ${view.rectified} (D′ = ${view.distance}) → ${view.candidates.join(", ")}`;
  $("rect-list").innerHTML = view.ranking
    .map((r) => `<li><code>${r.tree}</code> ${r.codepoints.join(" ")} · D′ ${r.d_combined} (tree ${r.d_tree}, stroke ${r.d_stroke})</li>`)
    .join("");
}

function renderPerturb() {
  try {
    const out = perturb_expr(
      $("pert-t").value,
      parseFloat($("p-sub").value), parseFloat($("p-del").value),
      parseFloat($("p-ins").value), parseFloat($("p-struct").value),
      BigInt($("p-seed").value || 0), trial,
    );
    $("pert-out").innerHTML = `trial ${trial}: <code>${out}</code>`;
    $("pert-out").dataset.tree = out;
  } catch (e) {
    fail($("pert-out"), e);
  }
}

await init();
for (const id of ["dist-a", "dist-b", "alpha", "beta"]) $(id).addEventListener("input", () => { renderDistance(); renderRectify(); });
for (const id of ["rect-q", "rect-lex", "rect-k"]) $(id).addEventListener("input", renderRectify);
$("rect-sample").addEventListener("click", () => { $("rect-lex").value = sample_lexicon(200, 42n); renderRectify(); });
$("pert-go").addEventListener("click", () => { trial += 1n; renderPerturb(); });
$("pert-use").addEventListener("click", () => {
  const t = $("pert-out").dataset.tree;
  if (t) { $("dist-a").value = t; $("rect-q").value = t; renderDistance(); renderRectify(); }
});
renderDistance();
renderRectify();
renderPerturb();
