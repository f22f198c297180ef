// Typed client for the review service JSON API. The annotator identity
// travels in the X-Annotator header; label submissions carry a request id
// so a retry after a dropped response cannot double-journal.

export interface LabelState {
  relevant: boolean;
  note: string;
  timestamp: string;
}

export interface EntryPacket {
  id: string;
  issue_title: string;
  issue_url: string;
  issue_description: string;
  issue_comments: [string, string][];
  origin_code: string;
  accepted_fix: string;
  log_before: string | null;
  log_after: string | null;
  labels: Record<string, LabelState>;
  final_relevance: string;
  my_label?: LabelState | null;
}

export interface EntryList {
  entries: EntryPacket[];
  next_cursor: number | null;
  assigned: number;
  labeled: number;
}

export interface KappaStats {
  kappa: number | null;
  n: number;
  p_o: number | null;
  p_e: number | null;
}

export interface AdjudicationQueue {
  entries: string[];
  adjudicator: string;
}

export interface LabelAck {
  ok: boolean;
  label: { entry_id: string; annotator: string; relevant: boolean; note: string };
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(message: string, readonly status: number) {
    super(message);
  }
}

const newRequestId = (): string =>
  `req-${Date.now().toString(36)}-${Math.random().toString(36).slice(2, 10)}`;

export class ReviewApi {
  constructor(
    readonly annotator: string,
    readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init)
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      ...init,
      headers: {
        "Content-Type": "application/json",
        "X-Annotator": this.annotator,
        ...(init?.headers ?? {}),
      },
    });
    if (!response.ok) {
      throw new ApiError(`${path}: HTTP ${response.status}`, response.status);
    }
    return (await response.json()) as T;
  }

  listEntries(cursor = 0, limit = 50, unlabeledOnly = false): Promise<EntryList> {
    const params = new URLSearchParams({
      annotator: this.annotator,
      cursor: String(cursor),
      limit: String(limit),
    });
    if (unlabeledOnly) params.set("unlabeled_only", "true");
    return this.request<EntryList>(`/api/entries?${params}`);
  }

  getEntry(id: string): Promise<EntryPacket> {
    return this.request<EntryPacket>(`/api/entries/${encodeURIComponent(id)}`);
  }

  submitLabel(
    id: string,
    relevant: boolean,
    note = "",
    requestId: string = newRequestId()
  ): Promise<LabelAck> {
    return this.request<LabelAck>(`/api/entries/${encodeURIComponent(id)}/label`, {
      method: "PUT",
      body: JSON.stringify({ relevant, note, request_id: requestId }),
    });
  }

  kappa(): Promise<KappaStats> {
    return this.request<KappaStats>("/api/stats/kappa");
  }

  adjudicationQueue(): Promise<AdjudicationQueue> {
    return this.request<AdjudicationQueue>("/api/adjudication");
  }
}

export { newRequestId };
