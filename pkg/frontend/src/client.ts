/*
 * Typed client for the annotation HTTP API.
 */

export type TaskParagraph = {
    index: number;
    text: string;
};

export type TaskPayload = {
    task_id: string;
    qa_id: string;
    language: string;
    title: string;
    question: string;
    paragraphs: TaskParagraph[];
    status: "open" | "done";
};

export type VerdictKind = "selections" | "nota" | "not_understood";

export type Verdict = {
    kind: VerdictKind;
    selections: number[];
};

export type StoredResponse = {
    task_id: string;
    annotator_id: string;
    verdict_kind: VerdictKind;
    selections: number[];
    submitted_at: number;
};

export type SubmitResult = {
    stored: StoredResponse;
    task_status: "open" | "done";
};

export type GoldRecord = {
    qa_id: string;
    gold_ids: number[];
    annotator_count: number;
    any_nota: boolean;
    any_not_understood: boolean;
};

export class ApiError extends Error {
    constructor(public readonly status: number, public readonly code: string, message: string) {
        super(message);
        this.name = "ApiError";
    }
}

export class AnnotationClient {
    constructor(private readonly baseUrl: string = "") {}

    public async openTasks(annotator: string, limit: number = 8): Promise<TaskPayload[]> {
        const query = new URLSearchParams({ annotator, limit: String(limit) });
        const body = await this.request(`/api/tasks?${query}`);
        return (body as { tasks: TaskPayload[] }).tasks;
    }

    public async task(taskId: string): Promise<TaskPayload> {
        return (await this.request(`/api/task/${encodeURIComponent(taskId)}`)) as TaskPayload;
    }

    public async submit(taskId: string, annotatorId: string, verdict: Verdict): Promise<SubmitResult> {
        const body = await this.request(`/api/task/${encodeURIComponent(taskId)}/response`, {
            method: "POST",
            body: JSON.stringify({ annotator_id: annotatorId, verdict }),
            headers: { "Content-Type": "application/json" },
        });
        return body as SubmitResult;
    }

    public async exportGold(): Promise<GoldRecord[]> {
        const body = await this.request("/api/export/gold");
        return (body as { gold: GoldRecord[] }).gold;
    }

    private async request(path: string, init?: RequestInit): Promise<unknown> {
        const response = await fetch(this.baseUrl + path, init);
        const body = await response.json();
        if (!response.ok) {
            const err = body as { error?: string; message?: string };
            throw new ApiError(response.status, err.error ?? "unknown", err.message ?? response.statusText);
        }
        return body;
    }
}
