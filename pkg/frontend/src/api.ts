/** Thin typed client over the workspace HTTP API.
 *
 * Every story mutation in the app goes through this client; nothing edits
 * text client-side. The fetch function is injectable so tests can stub the
 * service.
 */
import type {
  Decisions,
  EditIntentDoc,
  EventMappingDoc,
  HistoryDoc,
  JobDoc,
  PendingChangeDoc,
  RangeMappingDoc,
  ScopeDoc,
  StoryModelDoc,
  ViewModelDoc,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail);
  }
}

export class WorkspaceClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: { "content-type": "application/json" } };
    if (body !== undefined) init.body = JSON.stringify(body);
    const response = await this.fetchImpl(this.baseUrl + path, init);
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const payload = (await response.json()) as { detail?: string };
        if (payload.detail) detail = payload.detail;
      } catch {
        /* keep the status text */
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  createProject(name: string, text: string): Promise<{ id: string }> {
    return this.request("POST", "/projects", { name, text });
  }

  getModel(projectId: string): Promise<StoryModelDoc> {
    return this.request("GET", `/projects/${projectId}/model`);
  }

  getBuiltinView(projectId: string, name: string, grouped = false): Promise<ViewModelDoc> {
    const suffix = grouped ? "?grouped=true" : "";
    return this.request("GET", `/projects/${projectId}/view/${name}${suffix}`);
  }

  putText(projectId: string, text: string): Promise<{ stale: boolean }> {
    return this.request("PUT", `/projects/${projectId}/text`, { text });
  }

  refresh(projectId: string, incremental: boolean): Promise<{ jobId: string }> {
    const path = incremental ? "refresh-incremental" : "refresh";
    return this.request("POST", `/projects/${projectId}/${path}`);
  }

  postEdit(
    projectId: string,
    intent: EditIntentDoc,
    scope?: ScopeDoc,
  ): Promise<{ jobId: string }> {
    const body: { intent: EditIntentDoc; scope?: ScopeDoc } = { intent };
    if (scope) body.scope = scope;
    return this.request("POST", `/projects/${projectId}/edits`, body);
  }

  rewriteFromVisuals(projectId: string, scope?: ScopeDoc): Promise<{ jobId: string }> {
    return this.request("POST", `/projects/${projectId}/rewrite-from-visuals`, scope ? { scope } : {});
  }

  getChanges(projectId: string): Promise<{ pendingChange: PendingChangeDoc | null }> {
    return this.request("GET", `/projects/${projectId}/changes`);
  }

  resolveChanges(
    projectId: string,
    decisions: Decisions,
  ): Promise<{ text: string; stale: boolean; snapshotId: string }> {
    return this.request("POST", `/projects/${projectId}/changes/resolve`, { decisions });
  }

  getHistory(projectId: string): Promise<HistoryDoc> {
    return this.request("GET", `/projects/${projectId}/history`);
  }

  checkout(projectId: string, snapshotId: string): Promise<{ text: string; currentId: string }> {
    return this.request("POST", `/projects/${projectId}/history/checkout`, { snapshotId });
  }

  getJob(projectId: string, jobId: string): Promise<JobDoc> {
    return this.request("GET", `/projects/${projectId}/jobs/${jobId}`);
  }

  mapEvent(projectId: string, eventId: string): Promise<EventMappingDoc> {
    return this.request("GET", `/projects/${projectId}/mapping?from=event&id=${eventId}`);
  }

  mapRange(projectId: string, start: number, end: number): Promise<RangeMappingDoc> {
    return this.request(
      "GET",
      `/projects/${projectId}/mapping?from=range&start=${start}&end=${end}`,
    );
  }

  jobEventsUrl(projectId: string, jobId: string): string {
    return `${this.baseUrl}/projects/${projectId}/jobs/${jobId}/events`;
  }
}
