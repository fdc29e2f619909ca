/** Wire types for the editor-service JSON API. */

export interface NonDefaultField {
  name: string;
  value: string;
}

export type FieldKind = "VARIABLE" | "INPUT" | "OUTPUT" | "FORWARD";

export interface FieldNode {
  field: string;
  kind: FieldKind;
  /** 24-bit RGB color. */
  color: number;
}

export interface ViewRecord {
  name: string;
  type: string;
  x: number;
  y: number;
  nonDefaultFields: NonDefaultField[];
  fieldNodes: FieldNode[];
}

export interface Waypoint {
  id: string;
  x: number;
  y: number;
}

export interface ViewLink {
  /** "record.FIELD" of the link-carrying field. */
  source: string;
  /** "record.FIELD" of the target. */
  targetLabel: string;
  broken: boolean;
  interGroup: boolean;
  waypoints: Waypoint[];
}

export interface Subgroup {
  name: string;
  memberCount: number;
  boundingBox: { x: number; y: number; w: number; h: number } | null;
}

export interface Diagnostic {
  severity: string;
  code: string;
  message: string;
  line?: number;
  column?: number;
  path?: string;
}

export interface ViewModel {
  groupPath: string;
  records: ViewRecord[];
  links: ViewLink[];
  subgroups: Subgroup[];
  diagnostics: Diagnostic[];
  revision: number;
}

export type Command =
  | { kind: "CreateRecord"; type: string; name: string }
  | { kind: "DeleteRecord"; name: string }
  | { kind: "RenameRecord"; old: string; new: string }
  | { kind: "SetField"; record: string; field: string; value: string }
  | { kind: "RemoveField"; record: string; field: string }
  | { kind: "MoveRecord"; name: string; dx: number; dy: number }
  | { kind: "SetLink"; source: string; target: string }
  | { kind: "ClearLink"; source: string }
  | { kind: "AddConnector"; source: string; x: number; y: number }
  | { kind: "MoveConnector"; id: string; dx: number; dy: number }
  | { kind: "RemoveConnector"; id: string };
