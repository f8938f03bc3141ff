use super::{Speaker, Utterance};
use crate::{Error, Result};

/// One hour: an agent reply must arrive within this many seconds.
pub const DEFAULT_PAIR_WINDOW_S: i64 = 3600;

#[derive(Debug, Clone, PartialEq)]
pub struct UtterancePair {
    pub driver: Utterance,
    pub agent: Utterance,
}

/// Pairs each agent reply with the nearest preceding unpaired driver turn,
/// provided the reply arrives within `(0, window_s]` seconds of it.
///
/// A newer driver turn supersedes an older unanswered one, so in a burst of
/// driver messages only the last one is paired. Each agent turn is used at
/// most once; anything left unpaired is dropped.
pub fn pair_messages(conversation: &[Utterance], window_s: i64) -> Result<Vec<UtterancePair>> {
    Ok(pair_indices(conversation, window_s)?
        .into_iter()
        .map(|(d, a)| UtterancePair {
            driver: conversation[d].clone(),
            agent: conversation[a].clone(),
        })
        .collect())
}

/// Index form of [`pair_messages`]: (driver index, agent index) pairs.
pub(crate) fn pair_indices(
    conversation: &[Utterance],
    window_s: i64,
) -> Result<Vec<(usize, usize)>> {
    if let Some(index) = conversation
        .windows(2)
        .position(|w| w[1].timestamp < w[0].timestamp)
    {
        return Err(Error::Ordering { index: index + 1 });
    }
    let mut pairs = Vec::new();
    let mut pending: Option<usize> = None;
    for (i, utt) in conversation.iter().enumerate() {
        match utt.speaker {
            Speaker::Driver => pending = Some(i),
            Speaker::Agent => {
                if let Some(d) = pending {
                    let delay = utt.timestamp - conversation[d].timestamp;
                    if delay > 0 && delay <= window_s {
                        pairs.push((d, i));
                        pending = None;
                    }
                }
            }
        }
    }
    Ok(pairs)
}
