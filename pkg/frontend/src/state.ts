/*
 * View state for a single annotation task.
 *
 * Invariants enforced here rather than in the DOM layer:
 *  - paragraph selections and the special verdicts (NOTA / question unclear)
 *    are mutually exclusive: activating either side clears the other;
 *  - a task submits at most once per view, no matter how often the button
 *    fires;
 *  - a verdict can only be built when something was actually chosen.
 */

import { AnnotationClient, SubmitResult, TaskPayload, Verdict } from "./client.js";

export type SpecialVerdict = "nota" | "not_understood";

export class TaskView {
    private readonly valid: Set<number>;
    private readonly selected = new Set<number>();
    private special: SpecialVerdict | null = null;
    private submitted = false;

    constructor(public readonly task: TaskPayload) {
        this.valid = new Set(task.paragraphs.map((p) => p.index));
    }

    public isSelected(index: number): boolean {
        return this.selected.has(index);
    }

    public get selectedIndices(): number[] {
        return [...this.selected].sort((a, b) => a - b);
    }

    public get specialVerdict(): SpecialVerdict | null {
        return this.special;
    }

    public get isSubmitted(): boolean {
        return this.submitted;
    }

    /** Toggling any paragraph checkbox deactivates NOTA / question-unclear. */
    public toggleParagraph(index: number): void {
        if (!this.valid.has(index)) {
            throw new Error(`task ${this.task.task_id} has no paragraph ${index}`);
        }
        this.special = null;
        if (this.selected.has(index)) {
            this.selected.delete(index);
        } else {
            this.selected.add(index);
        }
    }

    /** Activating NOTA / question-unclear clears every paragraph checkbox. */
    public setSpecial(kind: SpecialVerdict | null): void {
        this.special = kind;
        if (kind !== null) {
            this.selected.clear();
        }
    }

    public get canSubmit(): boolean {
        return !this.submitted && (this.special !== null || this.selected.size > 0);
    }

    public buildVerdict(): Verdict {
        if (this.special !== null) {
            return { kind: this.special, selections: [] };
        }
        if (this.selected.size === 0) {
            throw new Error("nothing selected: choose paragraphs or a special verdict");
        }
        return { kind: "selections", selections: this.selectedIndices };
    }

    /** Submit the current verdict; repeated calls after success are no-ops. */
    public async submitOnce(client: AnnotationClient, annotatorId: string): Promise<SubmitResult | null> {
        if (this.submitted) {
            return null;
        }
        const verdict = this.buildVerdict();
        const result = await client.submit(this.task.task_id, annotatorId, verdict);
        this.submitted = true;
        return result;
    }
}

export function batchProgress(views: TaskView[]): { done: number; total: number } {
    return { done: views.filter((v) => v.isSubmitted).length, total: views.length };
}
