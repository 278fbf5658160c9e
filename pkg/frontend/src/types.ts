export type Question = {
  v: number;
  id: string;
  relation: string;
  prompt: string;
  options: string[];
  payload: Record<string, unknown>;
  context: string | null;
};

export type Answer = {
  question_id: string;
  worker_id: string;
  choice: string;
};

export type RelationStats = {
  questions: number;
  fully_answered: number;
  kappa: number | null;
  majority_proportions: Record<string, number>;
};

export type Stats = {
  n_raters: number;
  total_responses: number;
  relations: Record<string, RelationStats>;
};

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;
