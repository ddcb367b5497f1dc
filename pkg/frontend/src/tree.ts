// Parser for the decorated tree serialization the server sends. Types are
// kept as canonical text; the workbench never computes with them.

export type Mark = "ok" | "err";

export interface DecNode {
  form: string;                   // hole | var | lam | ap | asc | num | bool
                                  // | pair | fst | snd | nil | cons | case
  marks: Mark[];                  // per-form marks, in head order
  name?: string;                  // var
  binder?: string;                // lam binder / case head binder ("?" = hole)
  binder2?: string;               // case tail binder
  value?: string;                 // literal text
  surface?: string;               // lam annotation / ascribed type
  children: DecNode[];
  ana: string | null;
  mark: Mark;                     // wrapper consistency mark
  syn: string | null;
  dirty: Set<string>;             // subset of ana, syn, ann, asc
}

class Reader {
  private toks: string[];
  private k = 0;

  constructor(text: string) {
    this.toks = tokenize(text);
  }

  peek(): string | undefined {
    return this.toks[this.k];
  }

  next(): string {
    const t = this.toks[this.k++];
    if (t === undefined) throw new Error("unexpected end of tree text");
    return t;
  }

  expect(want: string): void {
    const t = this.next();
    if (t !== want) throw new Error(`expected ${want}, found ${t}`);
  }

  done(): void {
    if (this.k !== this.toks.length) {
      throw new Error(`trailing input ${this.toks[this.k]}`);
    }
  }
}

function tokenize(text: string): string[] {
  const out: string[] = [];
  let i = 0;
  while (i < text.length) {
    const c = text[i];
    if (/\s/.test(c)) {
      i++;
    } else if ("(){}[]=,".includes(c)) {
      out.push(c);
      i++;
    } else {
      let j = i;
      while (j < text.length && !/\s/.test(text[j]) && !"(){}[]=,".includes(text[j])) j++;
      out.push(text.slice(i, j));
      i = j;
    }
  }
  return out;
}

function readType(r: Reader): string {
  const t = r.next();
  if (t === "?" || t === "num" || t === "bool") return t;
  if (t !== "(") throw new Error(`expected a type, found ${t}`);
  const head = r.next();
  if (head === "arrow" || head === "prod") {
    const a = readType(r);
    const b = readType(r);
    r.expect(")");
    return `(${head} ${a} ${b})`;
  }
  if (head === "list") {
    const a = readType(r);
    r.expect(")");
    return `(list ${a})`;
  }
  throw new Error(`unknown type form ${head}`);
}

function readMarks(r: Reader, n: number): Mark[] {
  r.expect("[");
  const marks: Mark[] = [];
  for (let i = 0; i < n; i++) {
    if (i > 0) r.expect(",");
    const m = r.next();
    if (m !== "ok" && m !== "err") throw new Error(`bad mark ${m}`);
    marks.push(m);
  }
  r.expect("]");
  return marks;
}

function readTypeOpt(r: Reader): string | null {
  if (r.peek() === "none") {
    r.next();
    return null;
  }
  return readType(r);
}

function readNode(r: Reader): DecNode {
  r.expect("(");
  const tok = r.next();
  const node: DecNode = {
    form: "", marks: [], children: [], ana: null, mark: "ok", syn: null,
    dirty: new Set(),
  };
  if (tok === "?") {
    node.form = "hole";
  } else if (tok === "nil") {
    node.form = "nil";
  } else if (tok === "(") {
    const head = r.next();
    node.form = head;
    switch (head) {
      case "num":
      case "bool":
        node.value = r.next();
        break;
      case "var":
        node.marks = readMarks(r, 1);
        node.name = r.next();
        break;
      case "lam":
        node.marks = readMarks(r, 2);
        node.binder = r.next();
        node.surface = readType(r);
        node.children.push(readNode(r));
        break;
      case "ap":
      case "pair":
      case "cons":
        node.marks = readMarks(r, 1);
        node.children.push(readNode(r), readNode(r));
        break;
      case "asc":
        node.children.push(readNode(r));
        node.surface = readType(r);
        break;
      case "fst":
      case "snd":
        node.marks = readMarks(r, 1);
        node.children.push(readNode(r));
        break;
      case "case":
        node.marks = readMarks(r, 1);
        node.children.push(readNode(r), readNode(r));
        node.binder = r.next();
        node.binder2 = r.next();
        node.children.push(readNode(r));
        break;
      default:
        throw new Error(`unknown form ${head}`);
    }
    r.expect(")");
  } else {
    throw new Error(`unexpected token ${tok}`);
  }
  r.expect("{");
  r.expect("ana");
  r.expect("=");
  node.ana = readTypeOpt(r);
  r.expect(",");
  r.expect("mark");
  r.expect("=");
  const m = r.next();
  if (m !== "ok" && m !== "err") throw new Error(`bad mark ${m}`);
  node.mark = m;
  r.expect(",");
  r.expect("syn");
  r.expect("=");
  node.syn = readTypeOpt(r);
  r.expect(",");
  r.expect("dirty");
  r.expect("=");
  r.expect("[");
  while (r.peek() !== "]") {
    const slot = r.next();
    if (slot === ",") continue;
    if (!["ana", "syn", "ann", "asc"].includes(slot)) {
      throw new Error(`bad dirty slot ${slot}`);
    }
    node.dirty.add(slot);
  }
  r.expect("]");
  r.expect("}");
  r.expect(")");
  return node;
}

export function parseTree(text: string): DecNode {
  const r = new Reader(text);
  const node = readNode(r);
  r.done();
  return node;
}
