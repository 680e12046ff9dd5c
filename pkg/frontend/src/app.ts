/*
 * Annotator UI entry point: loads the annotator's open batch and renders one
 * card per task. All selection rules live in TaskView (state.ts); this file
 * only wires DOM events to it.
 */

import { AnnotationClient } from "./client.js";
import { SpecialVerdict, TaskView, batchProgress } from "./state.js";

const client = new AnnotationClient("");

function el<K extends keyof HTMLElementTagNameMap>(
    tag: K,
    className?: string,
    text?: string,
): HTMLElementTagNameMap[K] {
    const node = document.createElement(tag);
    if (className) node.className = className;
    if (text !== undefined) node.textContent = text;
    return node;
}

function renderProgress(views: TaskView[]): void {
    const { done, total } = batchProgress(views);
    const bar = document.getElementById("progress")!;
    bar.textContent = total === 0 ? "no open tasks" : `${done} / ${total} submitted`;
}

function renderTask(view: TaskView, annotatorId: string, views: TaskView[]): HTMLElement {
    const card = el("section", "task");
    card.appendChild(el("h2", "question", view.task.question));
    card.appendChild(el("p", "meta", `${view.task.title} · ${view.task.language} · ${view.task.task_id}`));

    const boxes = new Map<number, HTMLInputElement>();
    const specials = new Map<SpecialVerdict, HTMLInputElement>();

    const sync = () => {
        for (const [index, box] of boxes) box.checked = view.isSelected(index);
        for (const [kind, box] of specials) box.checked = view.specialVerdict === kind;
        submit.disabled = !view.canSubmit;
        if (view.isSubmitted) card.classList.add("submitted");
        renderProgress(views);
    };

    const list = el("div", "paragraphs");
    for (const paragraph of view.task.paragraphs) {
        const label = el("label", "paragraph");
        const box = el("input");
        box.type = "checkbox";
        box.addEventListener("change", () => {
            view.toggleParagraph(paragraph.index);
            sync();
        });
        boxes.set(paragraph.index, box);
        label.appendChild(box);
        label.appendChild(el("span", undefined, paragraph.text));
        list.appendChild(label);
    }
    card.appendChild(list);

    const specialRow = el("div", "specials");
    const specialLabels: [SpecialVerdict, string][] = [
        ["nota", "None of the above answers it"],
        ["not_understood", "I don't understand the question"],
    ];
    for (const [kind, text] of specialLabels) {
        const label = el("label", "special");
        const box = el("input");
        box.type = "checkbox";
        box.addEventListener("change", () => {
            view.setSpecial(view.specialVerdict === kind ? null : kind);
            sync();
        });
        specials.set(kind, box);
        label.appendChild(box);
        label.appendChild(el("span", undefined, text));
        specialRow.appendChild(label);
    }
    card.appendChild(specialRow);

    const submit = el("button", "submit", "Submit");
    submit.addEventListener("click", async () => {
        submit.disabled = true;
        try {
            await view.submitOnce(client, annotatorId);
        } catch (err) {
            card.appendChild(el("p", "error", String(err)));
        }
        sync();
    });
    card.appendChild(submit);

    sync();
    return card;
}

async function loadBatch(): Promise<void> {
    const annotatorId = (document.getElementById("annotator") as HTMLInputElement).value.trim();
    if (!annotatorId) return;
    const tasks = await client.openTasks(annotatorId);
    const views = tasks.map((t) => new TaskView(t));
    const container = document.getElementById("tasks")!;
    container.replaceChildren(...views.map((v) => renderTask(v, annotatorId, views)));
    renderProgress(views);
}

export function init(): void {
    document.getElementById("load")!.addEventListener("click", () => {
        loadBatch().catch((err) => {
            document.getElementById("tasks")!.replaceChildren(el("p", "error", String(err)));
        });
    });
}

if (typeof document !== "undefined" && document.getElementById("load")) {
    init();
}
