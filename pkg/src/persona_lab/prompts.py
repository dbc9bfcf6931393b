"""Fixed task prompts sent to agents (writing tasks and the BFI questionnaire frame)."""

WRITING_PROMPT = (
    "Please share a personal story below in 800 words. "
    "Do not explicitly mention your personality traits in the story."
)

INTERACTIVE_MARKER = "Last response to question is "

INTERACTIVE_TEMPLATE = WRITING_PROMPT + " " + INTERACTIVE_MARKER + "{other_model_response}"

BFI_TEMPLATE = (
    "Here are a number of characteristics that may or may not apply to you. "
    "For example, do you agree that you are someone who likes to spend time with others? "
    "Please write a number next to each statement to indicate the extent to which you agree "
    "or disagree with that statement, such as `(a) 1' without explanation separated by new lines.\n"
    "\n"
    "1 for Disagree strongly, 2 Disagree a little, 3 for Neither agree nor disagree, "
    "4 for Agree a little, 5 for Agree strongly.\n"
    "\n"
    "Statements: {BFI statements}"
)


def interactive_prompt(other_model_response: str) -> str:
    # str.replace, not str.format: the partner story may contain braces
    return INTERACTIVE_TEMPLATE.replace("{other_model_response}", other_model_response)
