/** Flat `key = value` recipe files naming inputs, figure id, and output. */

import { readFileSync } from "node:fs";
import { RENDERERS } from "./figures.js";

export interface Recipe {
  figure: string;
  inputs: string[];
  output: string;
  logx?: boolean;
  logy?: boolean;
}

export class RecipeError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "RecipeError";
  }
}

export function parseRecipeText(text: string): Recipe {
  const entries: Record<string, string> = {};
  text.split(/\r?\n/).forEach((raw, i) => {
    const line = raw.split("#", 1)[0].trim();
    if (!line) return;
    const eq = line.indexOf("=");
    if (eq < 0) {
      throw new RecipeError(`line ${i + 1}: expected 'key = value', got '${raw}'`);
    }
    entries[line.slice(0, eq).trim()] = line.slice(eq + 1).trim();
  });
  for (const key of ["figure", "input", "output"]) {
    if (!entries[key]) {
      throw new RecipeError(`recipe is missing required key '${key}'`);
    }
  }
  if (!(entries.figure in RENDERERS)) {
    throw new RecipeError(
      `unknown figure '${entries.figure}'; pick one of ${Object.keys(RENDERERS).join(", ")}`,
    );
  }
  const recipe: Recipe = {
    figure: entries.figure,
    inputs: entries.input.split(",").map((p) => p.trim()).filter((p) => p.length > 0),
    output: entries.output,
  };
  if (entries.logx !== undefined) recipe.logx = entries.logx === "true";
  if (entries.logy !== undefined) recipe.logy = entries.logy === "true";
  return recipe;
}

export function loadRecipe(path: string): Recipe {
  return parseRecipeText(readFileSync(path, "utf8"));
}
