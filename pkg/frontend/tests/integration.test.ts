/*
 * Round trip against the real annotation server: spawns `nfqa serve` over a
 * throwaway corpus and drives it through the same client + view state the UI
 * uses.
 */

import { ChildProcess, spawn } from "node:child_process";
import { mkdtempSync, rmSync, writeFileSync } from "node:fs";
import { createServer } from "node:net";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { AnnotationClient, ApiError } from "../src/client.js";
import { TaskView } from "../src/state.js";

function freePort(): Promise<number> {
    return new Promise((resolve, reject) => {
        const server = createServer();
        server.once("error", reject);
        server.listen(0, "127.0.0.1", () => {
            const { port } = server.address() as { port: number };
            server.close(() => resolve(port));
        });
    });
}

function article(id: string, question: string, paragraphs: string[]): object {
    return {
        id,
        url: `https://news.example/${id}`,
        title: `Article ${id}`,
        language: "en",
        fetched_at: "2026-08-01T00:00:00Z",
        blocks: [
            { kind: "subheading", text: question, index: 0 },
            ...paragraphs.map((text, i) => ({ kind: "paragraph", text, index: i + 1 })),
        ],
    };
}

function qapair(id: string, articleId: string, question: string, context: number[], silver: number[]): object {
    return {
        id,
        article_id: articleId,
        question,
        context_paragraph_ids: context,
        silver_ids: silver,
        split: "unassigned",
    };
}

const jsonl = (records: object[]) => records.map((r) => JSON.stringify(r)).join("\n") + "\n";

let corpusDir: string;
let server: ChildProcess;
let client: AnnotationClient;

beforeAll(async () => {
    corpusDir = mkdtempSync(join(tmpdir(), "nfqa-ui-"));
    writeFileSync(
        join(corpusDir, "articles.en.jsonl"),
        jsonl([
            article("a1", "Why is the shipment late?", [
                "Storms closed the port.",
                "Customs re-inspected the cargo.",
                "Unrelated market news.",
            ]),
            article("a2", "Why did prices rise?", ["Supply fell.", "Demand surged.", "Weather commentary."]),
        ]),
    );
    writeFileSync(
        join(corpusDir, "qapairs.en.jsonl"),
        jsonl([
            qapair("q1", "a1", "Why is the shipment late?", [1, 2, 3], [1]),
            qapair("q2", "a2", "Why did prices rise?", [1, 2, 3], [2]),
        ]),
    );

    const port = await freePort();
    client = new AnnotationClient(`http://127.0.0.1:${port}`);
    server = spawn(
        "nfqa",
        [
            "serve",
            "--corpus", corpusDir,
            "--bind", `127.0.0.1:${port}`,
            "--responses-log", join(corpusDir, "responses.jsonl"),
        ],
        { stdio: "ignore" },
    );

    const deadline = Date.now() + 20_000;
    for (;;) {
        try {
            await client.exportGold();
            break;
        } catch {
            if (Date.now() > deadline) throw new Error("annotation server did not come up");
            await new Promise((r) => setTimeout(r, 200));
        }
    }
}, 30_000);

afterAll(() => {
    server?.kill();
    rmSync(corpusDir, { recursive: true, force: true });
});

describe("annotation round trip over HTTP", () => {
    it("serves the open batch with paragraphs but no labels", async () => {
        const tasks = await client.openTasks("alice");
        expect(tasks.map((t) => t.task_id)).toEqual(["q1", "q2"]);
        const q1 = tasks[0];
        expect(q1.paragraphs.map((p) => p.index)).toEqual([1, 2, 3]);
        for (const task of tasks) {
            expect(JSON.stringify(task)).not.toMatch(/silver/);
        }
    });

    it("checking paragraphs {1,2} and submitting exports gold exactly {1,2}", async () => {
        const tasks = await client.openTasks("alice");
        const view = new TaskView(tasks.find((t) => t.task_id === "q1")!);
        view.toggleParagraph(1);
        view.toggleParagraph(2);
        const result = await view.submitOnce(client, "alice");
        expect(result?.stored.selections).toEqual([1, 2]);

        const gold = await client.exportGold();
        const q1 = gold.find((g) => g.qa_id === "q1")!;
        expect(q1.gold_ids).toEqual([1, 2]);
        expect(q1.annotator_count).toBe(1);
    });

    it("a NOTA verdict survives the exclusivity rule and exports a flagged record", async () => {
        const task = await client.task("q2");
        const view = new TaskView(task);
        view.toggleParagraph(3);
        view.setSpecial("nota");
        expect(view.selectedIndices).toEqual([]);
        await view.submitOnce(client, "alice");

        const gold = await client.exportGold();
        const q2 = gold.find((g) => g.qa_id === "q2")!;
        expect(q2.gold_ids).toEqual([]);
        expect(q2.any_nota).toBe(true);
    });

    it("double submission stores exactly one response", async () => {
        const view = new TaskView(await client.task("q1"));
        view.toggleParagraph(2);
        expect(await view.submitOnce(client, "bob")).not.toBeNull();
        expect(await view.submitOnce(client, "bob")).toBeNull();
        // Even a raw duplicate POST replaces rather than duplicates.
        await client.submit("q1", "bob", { kind: "selections", selections: [2] });

        const gold = await client.exportGold();
        const q1 = gold.find((g) => g.qa_id === "q1")!;
        expect(q1.annotator_count).toBe(2);
    });

    it("surfaces structured API errors", async () => {
        await expect(client.task("missing")).rejects.toMatchObject({ status: 404, code: "not_found" });
        await expect(
            client.submit("q1", "alice", { kind: "selections", selections: [99] }),
        ).rejects.toMatchObject({ status: 422, code: "invalid_selection" });
        await expect(
            client.submit("q1", "alice", { kind: "selections", selections: [] }),
        ).rejects.toBeInstanceOf(ApiError);
    });
});
