// DOM wiring: keyboard-first review flow over the service API.
// y = relevant, n = non-relevant, s = skip.

import { EntryPacket, ReviewApi } from "./api.js";
import { DiffCell, buildSideBySideDiff, columnText, fnv1a } from "./diff.js";
import { KappaPanel, ReviewSession } from "./state.js";

const $ = (id: string): HTMLElement => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el;
};

const annotatorFromPage = (): string => {
  const fromQuery = new URLSearchParams(window.location.search).get("annotator");
  if (fromQuery) return fromQuery;
  const stored = window.localStorage.getItem("annotator");
  if (stored) return stored;
  const typed = window.prompt("Annotator id:") ?? "";
  window.localStorage.setItem("annotator", typed);
  return typed;
};

const renderCell = (cell: DiffCell): HTMLElement => {
  const td = document.createElement("td");
  td.className = `code ${cell.kind}`;
  if (cell.highlights.length === 0) {
    td.textContent = cell.text;
    return td;
  }
  let cursor = 0;
  for (const [start, end] of cell.highlights) {
    td.appendChild(document.createTextNode(cell.text.slice(cursor, start)));
    const mark = document.createElement("mark");
    mark.textContent = cell.text.slice(start, end);
    td.appendChild(mark);
    cursor = end;
  }
  td.appendChild(document.createTextNode(cell.text.slice(cursor)));
  return td;
};

const renderDiff = (entry: EntryPacket): void => {
  const body = $("diff-body");
  body.textContent = "";
  const rows = buildSideBySideDiff(entry.origin_code, entry.accepted_fix);
  // rendering must not mutate the payloads
  if (
    fnv1a(columnText(rows, "left")) !== fnv1a(entry.origin_code) ||
    fnv1a(columnText(rows, "right")) !== fnv1a(entry.accepted_fix)
  ) {
    throw new Error("diff rendering mutated the code payload");
  }
  for (const row of rows) {
    const tr = document.createElement("tr");
    const leftNo = document.createElement("td");
    leftNo.className = "lineno";
    leftNo.textContent = row.leftLine === null ? "" : String(row.leftLine);
    const rightNo = document.createElement("td");
    rightNo.className = "lineno";
    rightNo.textContent = row.rightLine === null ? "" : String(row.rightLine);
    tr.appendChild(leftNo);
    tr.appendChild(renderCell(row.left));
    tr.appendChild(rightNo);
    tr.appendChild(renderCell(row.right));
    body.appendChild(tr);
  }
};

const renderComments = (entry: EntryPacket): void => {
  const list = $("comments");
  list.textContent = "";
  for (const [author, text] of entry.issue_comments) {
    const item = document.createElement("li");
    const who = document.createElement("strong");
    who.textContent = author;
    item.appendChild(who);
    item.appendChild(document.createTextNode(`: ${text}`));
    list.appendChild(item);
  }
};

const show = (id: string, visible: boolean): void => {
  $(id).classList.toggle("hidden", !visible);
};

const main = async (): Promise<void> => {
  const annotator = annotatorFromPage();
  const api = new ReviewApi(annotator);
  const session = new ReviewSession(api);
  const kappaPanel = new KappaPanel(api);
  $("annotator-name").textContent = annotator;

  const render = (): void => {
    show("review-card", session.phase === "reviewing" || session.phase === "retry");
    show("retry-banner", session.phase === "retry");
    show("done-screen", session.phase === "done");
    show("error-screen", session.phase === "error");
    const { assigned, labeled } = session.progress;
    $("progress-text").textContent = `${labeled} / ${assigned}`;
    const bar = $("progress-fill");
    bar.style.width = assigned === 0 ? "0%" : `${(100 * labeled) / assigned}%`;
    if (session.phase === "error") {
      $("error-text").textContent = session.lastError;
      return;
    }
    if (session.phase === "done") {
      const retention = session.retentionPreview();
      $("retention-preview").textContent =
        retention === null
          ? "no labels submitted"
          : `${(100 * retention).toFixed(1)}% of your labels marked relevant`;
      return;
    }
    const entry = session.current;
    if (!entry) return;
    const title = $("issue-title") as HTMLAnchorElement;
    title.textContent = entry.issue_title;
    title.href = entry.issue_url;
    $("issue-description").textContent = entry.issue_description;
    renderComments(entry);
    renderDiff(entry);
  };

  const act = async (action: () => Promise<void> | void): Promise<void> => {
    await action();
    render();
  };

  $("btn-relevant").addEventListener("click", () => act(() => session.label(true)));
  $("btn-nonrelevant").addEventListener("click", () => act(() => session.label(false)));
  $("btn-skip").addEventListener("click", () => act(() => session.skip()));
  $("btn-retry").addEventListener("click", () => act(() => session.retry()));

  document.addEventListener("keydown", (event) => {
    if (event.target instanceof HTMLInputElement) return;
    if (event.key === "y") void act(() => session.label(true));
    else if (event.key === "n") void act(() => session.label(false));
    else if (event.key === "s") void act(() => session.skip());
  });

  const pollKappa = async (): Promise<void> => {
    await kappaPanel.refresh();
    $("kappa-panel").textContent = kappaPanel.display();
    const queue = await api.adjudicationQueue().catch(() => null);
    $("adjudication-panel").textContent =
      queue && queue.entries.length > 0
        ? `${queue.entries.length} disagreement(s) awaiting ${queue.adjudicator}`
        : "";
  };

  await session.start();
  render();
  await pollKappa();
  window.setInterval(() => void pollKappa(), 5000);
};

void main();
