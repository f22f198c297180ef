// Side-by-side line diff with intra-line highlight ranges, computed
// client-side from the two code payloads. Rendering never mutates the
// texts: joining the non-missing cells of each column reproduces the
// original inputs byte for byte.

export type CellKind = "same" | "changed" | "missing";

export interface DiffCell {
  text: string;
  kind: CellKind;
  // [start, end) character ranges that differ, for <mark> wrapping
  highlights: [number, number][];
}

export interface DiffRow {
  leftLine: number | null;
  rightLine: number | null;
  left: DiffCell;
  right: DiffCell;
}

const cell = (
  text: string,
  kind: CellKind,
  highlights: [number, number][] = []
): DiffCell => ({ text, kind, highlights });

// longest common subsequence table over lines
const lcsMatrix = (a: string[], b: string[]): number[][] => {
  const table: number[][] = Array.from({ length: a.length + 1 }, () =>
    new Array<number>(b.length + 1).fill(0)
  );
  for (let i = a.length - 1; i >= 0; i--) {
    for (let j = b.length - 1; j >= 0; j--) {
      table[i][j] =
        a[i] === b[j]
          ? table[i + 1][j + 1] + 1
          : Math.max(table[i + 1][j], table[i][j + 1]);
    }
  }
  return table;
};

type Op =
  | { kind: "same"; left: string; right: string }
  | { kind: "del"; left: string }
  | { kind: "add"; right: string };

const diffOps = (a: string[], b: string[]): Op[] => {
  const table = lcsMatrix(a, b);
  const ops: Op[] = [];
  let i = 0;
  let j = 0;
  while (i < a.length && j < b.length) {
    if (a[i] === b[j]) {
      ops.push({ kind: "same", left: a[i], right: b[j] });
      i++;
      j++;
    } else if (table[i + 1][j] >= table[i][j + 1]) {
      ops.push({ kind: "del", left: a[i] });
      i++;
    } else {
      ops.push({ kind: "add", right: b[j] });
      j++;
    }
  }
  while (i < a.length) ops.push({ kind: "del", left: a[i++] });
  while (j < b.length) ops.push({ kind: "add", right: b[j++] });
  return ops;
};

// character ranges that differ between two lines: common prefix/suffix
// trimming, highlighting the middle of each side
export const intraLineHighlights = (
  left: string,
  right: string
): { left: [number, number][]; right: [number, number][] } => {
  let prefix = 0;
  const max = Math.min(left.length, right.length);
  while (prefix < max && left[prefix] === right[prefix]) prefix++;
  let suffix = 0;
  while (
    suffix < max - prefix &&
    left[left.length - 1 - suffix] === right[right.length - 1 - suffix]
  ) {
    suffix++;
  }
  const ranges = (text: string): [number, number][] => {
    const start = prefix;
    const end = text.length - suffix;
    return end > start ? [[start, end]] : [];
  };
  return { left: ranges(left), right: ranges(right) };
};

export const buildSideBySideDiff = (before: string, after: string): DiffRow[] => {
  const leftLines = before.split("\n");
  const rightLines = after.split("\n");
  const rows: DiffRow[] = [];
  let leftNo = 1;
  let rightNo = 1;
  const ops = diffOps(leftLines, rightLines);
  // pair runs of del/add into changed rows so edits align side by side
  let k = 0;
  while (k < ops.length) {
    const op = ops[k];
    if (op.kind === "same") {
      rows.push({
        leftLine: leftNo++,
        rightLine: rightNo++,
        left: cell(op.left, "same"),
        right: cell(op.right, "same"),
      });
      k++;
      continue;
    }
    const dels: string[] = [];
    const adds: string[] = [];
    while (k < ops.length && ops[k].kind !== "same") {
      const run = ops[k];
      if (run.kind === "del") dels.push(run.left);
      else if (run.kind === "add") adds.push(run.right);
      k++;
    }
    const paired = Math.max(dels.length, adds.length);
    for (let p = 0; p < paired; p++) {
      const hasLeft = p < dels.length;
      const hasRight = p < adds.length;
      if (hasLeft && hasRight) {
        const marks = intraLineHighlights(dels[p], adds[p]);
        rows.push({
          leftLine: leftNo++,
          rightLine: rightNo++,
          left: cell(dels[p], "changed", marks.left),
          right: cell(adds[p], "changed", marks.right),
        });
      } else if (hasLeft) {
        rows.push({
          leftLine: leftNo++,
          rightLine: null,
          left: cell(dels[p], "changed"),
          right: cell("", "missing"),
        });
      } else {
        rows.push({
          leftLine: null,
          rightLine: rightNo++,
          left: cell("", "missing"),
          right: cell(adds[p], "changed"),
        });
      }
    }
  }
  return rows;
};

// reassemble one column; used to verify rendering never mutates the payload
export const columnText = (rows: DiffRow[], side: "left" | "right"): string =>
  rows
    .filter((row) => row[side].kind !== "missing")
    .map((row) => row[side].text)
    .join("\n");

// stable FNV-1a hash for payload integrity checks
export const fnv1a = (text: string): string => {
  let hash = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    hash ^= text.charCodeAt(i);
    hash = Math.imul(hash, 0x01000193) >>> 0;
  }
  return hash.toString(16).padStart(8, "0");
};
