#!/usr/bin/env node
/** render_figs: turn experiment CSVs into SVG figures.
 *
 * Usage:
 *   render_figs --recipe recipe.ini
 *   render_figs --figure fig5 --input error_scaling.csv --output fig5.svg
 */

import { parseArgs } from "node:util";
import { writeFileSync } from "node:fs";
import { RENDERERS, loadTable } from "./figures.js";
import { Recipe, RecipeError, loadRecipe } from "./recipe.js";

export function render(recipe: Recipe): string {
  const renderer = RENDERERS[recipe.figure];
  if (!renderer) {
    throw new RecipeError(`unknown figure '${recipe.figure}'`);
  }
  const tables = recipe.inputs.map(loadTable);
  const svg = renderer(tables, { logx: recipe.logx, logy: recipe.logy });
  writeFileSync(recipe.output, svg);
  return recipe.output;
}

export function main(argv: string[]): number {
  let parsed;
  try {
    parsed = parseArgs({
      args: argv,
      options: {
        recipe: { type: "string" },
        figure: { type: "string" },
        input: { type: "string" },
        output: { type: "string" },
        logx: { type: "string" },
        logy: { type: "string" },
      },
    });
  } catch (err) {
    console.error(`argument error: ${(err as Error).message}`);
    return 2;
  }
  const opts = parsed.values;
  try {
    let recipe: Recipe;
    if (opts.recipe) {
      recipe = loadRecipe(opts.recipe);
    } else {
      if (!opts.figure || !opts.input || !opts.output) {
        console.error("need either --recipe or all of --figure/--input/--output");
        return 2;
      }
      recipe = {
        figure: opts.figure,
        inputs: opts.input.split(",").map((p) => p.trim()),
        output: opts.output,
      };
      if (opts.logx !== undefined) recipe.logx = opts.logx === "true";
      if (opts.logy !== undefined) recipe.logy = opts.logy === "true";
    }
    const path = render(recipe);
    console.log(`wrote ${path}`);
    return 0;
  } catch (err) {
    console.error(`${(err as Error).name}: ${(err as Error).message}`);
    return 1;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url.endsWith(process.argv[1].split("/").pop() ?? "");
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
