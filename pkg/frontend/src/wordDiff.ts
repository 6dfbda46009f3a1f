export interface DiffToken {
  text: string;
  type: 'unchanged' | 'added' | 'removed';
}

function words(text: string): string[] {
  return text.split(/\s+/).filter((w) => w.length > 0);
}

// Track-changes diff between the original and the refined text.
// Pure function of the two strings; comparison is exact, so case and
// punctuation corrections show up as changes rather than being smoothed
// over. Within a replacement run, removals come before additions.
export function diffWords(original: string, refined: string): DiffToken[] {
  const oldWords = words(original);
  const newWords = words(refined);
  const rows = oldWords.length;
  const cols = newWords.length;

  // Longest common subsequence lengths; lcs[i][j] covers suffixes i.., j..
  const lcs: number[][] = Array.from({ length: rows + 1 }, () =>
    new Array<number>(cols + 1).fill(0),
  );
  for (let i = rows - 1; i >= 0; i--) {
    const row = lcs[i]!;
    const next = lcs[i + 1]!;
    for (let j = cols - 1; j >= 0; j--) {
      row[j] =
        oldWords[i] === newWords[j]
          ? next[j + 1]! + 1
          : Math.max(next[j]!, row[j + 1]!);
    }
  }

  const result: DiffToken[] = [];
  let i = 0;
  let j = 0;
  while (i < rows && j < cols) {
    if (oldWords[i] === newWords[j]) {
      result.push({ text: newWords[j]!, type: 'unchanged' });
      i++;
      j++;
    } else if (lcs[i + 1]![j]! >= lcs[i]![j + 1]!) {
      result.push({ text: oldWords[i]!, type: 'removed' });
      i++;
    } else {
      result.push({ text: newWords[j]!, type: 'added' });
      j++;
    }
  }
  while (i < rows) {
    result.push({ text: oldWords[i]!, type: 'removed' });
    i++;
  }
  while (j < cols) {
    result.push({ text: newWords[j]!, type: 'added' });
    j++;
  }
  return result;
}
