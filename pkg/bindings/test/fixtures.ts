/** Fixture builders: native model documents and matching scripts. */

export interface Shape {
  name: string;
  model: object;
  script: string;
}

function loopJson(cx: number, cy: number, half: number) {
  const pts = [
    [cx + half, cy - half],
    [cx + half, cy + half],
    [cx - half, cy + half],
    [cx - half, cy - half],
  ];
  return {
    start: [cx - half, cy - half],
    closed: true,
    curves: pts.map((p) => ({ type: "line", end: p, relative: false })),
  };
}

export function boxModel(side: number, height: number, cx = 0, cy = 0): object {
  return {
    schema: "recad/1",
    pairs: [
      {
        sketch: {
          origin: [0, 0, 0],
          x_axis: [1, 0, 0],
          normal: [0, 0, 1],
          faces: [{ outer: loopJson(cx, cy, side / 2), holes: [] }],
        },
        extrude: { dist_pos: height, dist_neg: 0 },
        op: "new",
      },
    ],
  };
}

export function cylinderModel(radius: number, height: number): object {
  return {
    schema: "recad/1",
    pairs: [
      {
        sketch: {
          origin: [0, 0, 0],
          x_axis: [1, 0, 0],
          normal: [0, 0, 1],
          faces: [
            {
              outer: { start: [0, 0], closed: true, curves: [{ type: "circle", radius }] },
              holes: [],
            },
          ],
        },
        extrude: { dist_pos: height, dist_neg: 0 },
        op: "new",
      },
    ],
  };
}

export function boxScript(side: number, height: number, cx = 0, cy = 0): string {
  const h = side / 2;
  return [
    `loop0 = Loop().moveTo(${cx - h}, ${cy - h}).lineTo(${cx + h}, ${cy - h})` +
      `.lineTo(${cx + h}, ${cy + h}).lineTo(${cx - h}, ${cy + h})` +
      `.lineTo(${cx - h}, ${cy - h}).close()`,
    "face0 = Face()",
    "face0.addLoop(loop0)",
    "sketch0 = Sketch([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0])",
    "sketch0.addFace(face0)",
    "cad_model = CADModel()",
    `cad_model.addSE(sketch0, Extrude((${height}, 0.0)), "new")`,
    "",
  ].join("\n");
}

export function cylinderScript(radius: number, height: number): string {
  return [
    `loop0 = Loop().moveTo(0.0, 0.0).circle(${radius})`,
    "face0 = Face()",
    "face0.addLoop(loop0)",
    "sketch0 = Sketch([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0])",
    "sketch0.addFace(face0)",
    "cad_model = CADModel()",
    `cad_model.addSE(sketch0, Extrude((${height}, 0.0)), "new")`,
    "",
  ].join("\n");
}

export interface RewardCase {
  name: string;
  solution: string;
  gt: object;
}

export interface EvalCase {
  name: string;
  pred: object;
  gt: object;
}

const think = "<think>plan the part step by step</think>\n";

/** 25 reward cases + 25 eval cases = the 50-case equivalence fixture. */
export function fixtureCases(): { reward: RewardCase[]; eval: EvalCase[] } {
  const shapes: Shape[] = [
    { name: "box-a", model: boxModel(0.8, 0.5), script: boxScript(0.8, 0.5) },
    { name: "box-b", model: boxModel(0.5, 0.9), script: boxScript(0.5, 0.9) },
    { name: "box-off", model: boxModel(0.6, 0.4, 0.1, 0.15), script: boxScript(0.6, 0.4, 0.1, 0.15) },
    { name: "cyl-a", model: cylinderModel(0.35, 0.6), script: cylinderScript(0.35, 0.6) },
    { name: "cyl-b", model: cylinderModel(0.45, 0.25), script: cylinderScript(0.45, 0.25) },
  ];
  const reward: RewardCase[] = [];
  for (const shape of shapes) {
    reward.push(
      {
        name: `${shape.name}/perfect`,
        solution: `${think}\`\`\`python\n${shape.script}\`\`\`\n`,
        gt: shape.model,
      },
      {
        name: `${shape.name}/no-think`,
        solution: shape.script,
        gt: shape.model,
      },
      {
        name: `${shape.name}/broken`,
        solution: `${think}\`\`\`python\nthis is ( not a script\n\`\`\`\n`,
        gt: shape.model,
      },
      {
        name: `${shape.name}/think-only`,
        solution: "<think>all thought, no code</think>\n",
        gt: shape.model,
      },
      {
        name: `${shape.name}/wrong-shape`,
        solution: `${think}\`\`\`python\n${shapes[(shapes.indexOf(shape) + 2) % shapes.length].script}\`\`\`\n`,
        gt: shape.model,
      },
    );
  }
  const evalCases: EvalCase[] = [];
  for (const a of shapes) {
    for (const b of shapes) {
      evalCases.push({ name: `${a.name}-vs-${b.name}`, pred: a.model, gt: b.model });
    }
  }
  return { reward, eval: evalCases };
}
