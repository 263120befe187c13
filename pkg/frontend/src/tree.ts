/**
 * Client-side mirror of the mediator's search-tree model, rebuilt purely
 * from the tree-view event frames (newChild / jumpTo / solution / failure).
 */

export type NodeKind = "choice" | "solution" | "failure";

export interface TreeNode {
  label: number;
  depth: number;
  kind: NodeKind;
  parent: number | null;
  children: number[];
}

export class TreeError extends Error {}

export class SearchTreeModel {
  readonly nodes = new Map<number, TreeNode>();
  private path: number[] = [0];

  constructor() {
    this.nodes.set(0, { label: 0, depth: 0, kind: "choice", parent: null, children: [] });
  }

  observe(port: string, node: number, depth: number): void {
    if (port === "newChild" || port === "choicePoint") {
      const parentLabel = this.path[depth - 1];
      if (parentLabel === undefined) throw new TreeError(`no parent at depth ${depth}`);
      if (this.nodes.has(node)) throw new TreeError(`duplicate tree node ${node}`);
      this.nodes.set(node, { label: node, depth, kind: "choice", parent: parentLabel, children: [] });
      this.nodes.get(parentLabel)!.children.push(node);
      this.path.length = depth;
      this.path.push(node);
    } else if (port === "jumpTo" || port === "backTo") {
      while (this.path.length > 0 && this.path[this.path.length - 1] !== node) {
        this.path.pop();
      }
      if (this.path.length === 0) throw new TreeError(`jump to unknown node ${node}`);
    } else if (port === "solution" || port === "failure") {
      const n = this.nodes.get(node);
      if (n === undefined) throw new TreeError(`leaf on unknown node ${node}`);
      n.kind = port;
    }
  }

  nodeCount(): number {
    return this.nodes.size - 1; // the implicit root is not a search node
  }

  leaves(): TreeNode[] {
    return [...this.nodes.values()].filter((n) => n.children.length === 0 && n.label !== 0);
  }

  solutionLeaves(): TreeNode[] {
    return this.leaves().filter((n) => n.kind === "solution");
  }

  failureLeaves(): TreeNode[] {
    return this.leaves().filter((n) => n.kind === "failure");
  }

  render(): string {
    const lines: string[] = [];
    const walk = (label: number): void => {
      const node = this.nodes.get(label)!;
      lines.push("  ".repeat(node.depth) + `n${node.label} ${node.kind}`);
      for (const child of node.children) walk(child);
    };
    walk(0);
    return lines.join("\n");
  }
}
