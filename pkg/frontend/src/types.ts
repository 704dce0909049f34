/** Wire types mirroring the session service's JSON payloads. */

export type ContentPreview =
  | { kind: "vector"; values: number[]; length: number }
  | { kind: "text"; text: string }
  | { kind: "image"; imageBase64?: string; imageRef?: string };

export type LabelStatus = "unlabeled" | "default" | "humanLabeled";

export interface CurrentLabel {
  uuid: string;
  status: LabelStatus;
  category?: string;
  freeText?: string;
}

export interface SampledObject {
  uuid: string;
  content: ContentPreview;
  currentLabel: CurrentLabel;
}

export interface InterfaceHints {
  layout: "gridMatrix" | "singleObject";
  rows?: number;
  columns?: number;
}

export interface InteractionRequest {
  requestId: string;
  sessionId: string;
  nodeId: string;
  function: string;
  implementationKey: string;
  persistent: boolean;
  payload: {
    sampledObjects: SampledObject[];
    categories: string[];
    interfaceHints: InterfaceHints;
  };
}

export interface LabelAnswer {
  uuid: string;
  category: string;
  freeText?: string;
}

export interface ResponseBody {
  requestId: string;
  outputs: {
    labels?: LabelAnswer[];
    categories?: string[];
    samples?: string[];
  };
}

export interface FixSuggestion {
  kind: string;
  detail: Record<string, unknown>;
}

export interface Diagnostic {
  code: string;
  severity: "error" | "warning";
  message: string;
  subjects: string[];
  fixes: FixSuggestion[];
}

export interface SessionProgress {
  total: number;
  humanLabeled: number;
  fraction: number;
}

export interface SessionSummary {
  id: string;
  status: string;
  cursor: string | null;
  workflowValid: boolean;
  progress: SessionProgress;
  diagnostics: Diagnostic[];
}

export interface RequestListPayload {
  pending: InteractionRequest[];
  panels: InteractionRequest[];
}
