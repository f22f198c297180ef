import { beforeEach, describe, expect, it } from "vitest";

import { EntryPacket, FetchLike, ReviewApi } from "../src/api.js";
import { KappaPanel, ReviewSession } from "../src/state.js";

// In-memory stand-in for the review service, implementing the same label
// contract: latest label wins, identical labels and repeated request ids
// do not re-journal.

interface JournalRecord {
  entryId: string;
  annotator: string;
  relevant: boolean;
  note: string;
  requestId: string;
}

class FakeService {
  journal: JournalRecord[] = [];
  current = new Map<string, JournalRecord>();
  offline = false;
  kappaStats: { kappa: number | null; n: number; p_o: number | null; p_e: number | null } =
    { kappa: null, n: 0, p_o: null, p_e: null };

  constructor(readonly entries: EntryPacket[], readonly assignedTo: string[]) {}

  private packet(id: string, annotator: string): EntryPacket {
    const entry = this.entries.find((e) => e.id === id);
    if (!entry) throw new Error(`unknown entry ${id}`);
    const mine = this.current.get(`${id}:${annotator}`);
    return {
      ...entry,
      my_label: mine
        ? { relevant: mine.relevant, note: mine.note, timestamp: "t" }
        : null,
    };
  }

  fetch: FetchLike = async (input, init) => {
    if (this.offline) throw new TypeError("fetch failed: network down");
    const url = new URL(input, "http://fake");
    const annotator = String(
      (init?.headers as Record<string, string>)?.["X-Annotator"] ?? ""
    );
    const json = (body: unknown, status = 200) =>
      new Response(JSON.stringify(body), {
        status,
        headers: { "Content-Type": "application/json" },
      });
    if (url.pathname === "/api/entries") {
      const ids = this.assignedTo;
      const unlabeledOnly = url.searchParams.get("unlabeled_only") === "true";
      let packets = ids.map((id) => this.packet(id, annotator));
      if (unlabeledOnly) packets = packets.filter((p) => !p.my_label);
      return json({
        entries: packets,
        next_cursor: null,
        assigned: ids.length,
        labeled: ids.filter((id) => this.current.has(`${id}:${annotator}`)).length,
      });
    }
    const labelMatch = url.pathname.match(/^\/api\/entries\/([^/]+)\/label$/);
    if (labelMatch && init?.method === "PUT") {
      const id = decodeURIComponent(labelMatch[1]);
      if (!this.entries.some((e) => e.id === id)) return json({ error: "404" }, 404);
      const body = JSON.parse(String(init.body)) as {
        relevant: boolean;
        note: string;
        request_id: string;
      };
      const key = `${id}:${annotator}`;
      const existing = this.current.get(key);
      const duplicate =
        existing &&
        (existing.requestId === body.request_id ||
          (existing.relevant === body.relevant && existing.note === body.note));
      if (!duplicate) {
        const record: JournalRecord = {
          entryId: id,
          annotator,
          relevant: body.relevant,
          note: body.note,
          requestId: body.request_id,
        };
        this.journal.push(record);
        this.current.set(key, record);
      }
      return json({ ok: true, label: { entry_id: id, annotator } });
    }
    const getMatch = url.pathname.match(/^\/api\/entries\/([^/]+)$/);
    if (getMatch) {
      const id = decodeURIComponent(getMatch[1]);
      if (!this.entries.some((e) => e.id === id)) return json({ error: "404" }, 404);
      return json(this.packet(id, annotator));
    }
    if (url.pathname === "/api/stats/kappa") return json(this.kappaStats);
    if (url.pathname === "/api/adjudication")
      return json({ entries: [], adjudicator: "adjudicator" });
    return json({ error: "not found" }, 404);
  };
}

const mkEntry = (i: number): EntryPacket => ({
  id: `e${i}`,
  issue_title: `Issue ${i}`,
  issue_url: `https://tracker/browse/DEMO-${i}`,
  issue_description: "desc",
  issue_comments: [["dev", "comment"]],
  origin_code: `void m${i}() {\n    LOG.debug("x");\n}`,
  accepted_fix: `void m${i}() {\n    LOG.warn("x");\n}`,
  log_before: 'LOG.debug("x");',
  log_after: 'LOG.warn("x");',
  labels: {},
  final_relevance: "Unlabeled",
  my_label: null,
});

describe("ReviewSession", () => {
  let service: FakeService;
  let api: ReviewApi;
  let session: ReviewSession;

  beforeEach(() => {
    service = new FakeService([mkEntry(0), mkEntry(1), mkEntry(2)], [
      "e0",
      "e1",
      "e2",
    ]);
    api = new ReviewApi("alice", "http://fake", service.fetch);
    session = new ReviewSession(api);
  });

  it("loads the unlabeled queue and exposes progress", async () => {
    await session.start();
    expect(session.phase).toBe("reviewing");
    expect(session.current?.id).toBe("e0");
    expect(session.progress).toEqual({ assigned: 3, labeled: 0, relevantCount: 0 });
    expect(session.hashes).not.toBeNull();
  });

  it("submitting a label updates the service and a later GET reflects it", async () => {
    await session.start();
    await session.label(true, "clearly related");
    const packet = await api.getEntry("e0");
    expect(packet.my_label?.relevant).toBe(true);
    expect(packet.my_label?.note).toBe("clearly related");
    expect(session.current?.id).toBe("e1");
    expect(session.progress.labeled).toBe(1);
  });

  it("reaches the done phase with a retention preview", async () => {
    await session.start();
    await session.label(true);
    await session.label(false);
    await session.label(true);
    expect(session.phase).toBe("done");
    expect(session.retentionPreview()).toBeCloseTo(2 / 3, 12);
  });

  it("skip defers the entry to the back of the queue without labeling", async () => {
    await session.start();
    session.skip();
    expect(session.current?.id).toBe("e1");
    await session.label(true);
    await session.label(true);
    // the skipped e0 comes back
    expect(session.current?.id).toBe("e0");
    expect(service.current.has("e0:alice")).toBe(false);
  });

  it("keeps the pending label across an outage and retry does not double-journal", async () => {
    await session.start();
    service.offline = true;
    await session.label(true, "keep me");
    expect(session.phase).toBe("retry");
    expect(session.pending?.entryId).toBe("e0");
    const requestId = session.pending?.requestId;
    // first retry still offline
    await session.retry();
    expect(session.phase).toBe("retry");
    expect(session.pending?.requestId).toBe(requestId);
    // service comes back: exactly one journal append
    service.offline = false;
    await session.retry();
    expect(session.phase).toBe("reviewing");
    expect(service.journal).toHaveLength(1);
    expect(service.journal[0].requestId).toBe(requestId);
    // a stale duplicate with the same request id is ignored server-side
    await api.submitLabel("e0", true, "keep me", requestId);
    expect(service.journal).toHaveLength(1);
  });

  it("payload hashes pin the rendered code to the service payload", async () => {
    await session.start();
    const { fnv1a } = await import("../src/diff.js");
    expect(session.hashes?.origin).toBe(fnv1a(session.current!.origin_code));
    expect(session.hashes?.fix).toBe(fnv1a(session.current!.accepted_fix));
  });
});

describe("KappaPanel", () => {
  it("renders the service-computed kappa verbatim", async () => {
    const service = new FakeService([mkEntry(0)], ["e0"]);
    service.kappaStats = { kappa: 0.886, n: 174, p_o: 0.95, p_e: 0.56 };
    const panel = new KappaPanel(new ReviewApi("alice", "http://fake", service.fetch));
    await panel.refresh();
    expect(panel.display()).toBe("kappa: 0.886 (n=174)");
  });

  it("degrades to n/a when the service has no overlap labels", async () => {
    const service = new FakeService([mkEntry(0)], ["e0"]);
    const panel = new KappaPanel(new ReviewApi("alice", "http://fake", service.fetch));
    await panel.refresh();
    expect(panel.display()).toBe("kappa: n/a");
  });
});
