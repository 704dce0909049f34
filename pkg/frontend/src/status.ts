/** Run dashboard view-model: progress, current node, diagnostics badges. */

import type { Diagnostic, SessionSummary } from "./types.js";

export interface DiagnosticBadge {
  severity: "error" | "warning";
  code: string;
  message: string;
  subjects: string[];
}

export interface DashboardView {
  sessionId: string;
  status: string;
  currentNode: string | null;
  workflowValid: boolean;
  progressFraction: number;
  progressText: string;
  diagnostics: DiagnosticBadge[];
}

/**
 * Diagnostics keep the server's ranked order exactly (it matches the
 * CLI's `validate --json` output); the view only adds display fields.
 */
export function buildDashboard(summary: SessionSummary): DashboardView {
  return {
    sessionId: summary.id,
    status: summary.status,
    currentNode: summary.cursor,
    workflowValid: summary.workflowValid,
    progressFraction: summary.progress.fraction,
    progressText: `${summary.progress.humanLabeled}/${summary.progress.total} labeled`,
    diagnostics: summary.diagnostics.map(toBadge),
  };
}

function toBadge(diag: Diagnostic): DiagnosticBadge {
  return {
    severity: diag.severity,
    code: diag.code,
    message: diag.message,
    subjects: diag.subjects,
  };
}
