"""A four-message right-of-way exchange used by the chat contract tests.

Robot ``i`` carries a patient 3.1 km from the hospital; robot ``j`` brings a
ventilator to a hospital 5.8 km away. They settle on ``i`` going first.
"""

MESSAGES = [
    "Robot i here. I am carrying a patient who needs treatment, and I am 3.1 km "
    "from the hospital. We are about to cross paths. What is your task?",
    "Robot j here. I am bringing a ventilator to the other hospital for an operation "
    "later today. I still have 5.8 km to go.",
    "Both jobs matter, but my patient needs care right now and I am much closer. "
    "Would you let me through first?",
    "Agreed. A patient waiting now outranks equipment for a later operation, and you "
    "will be clear sooner. I will give way.\n{i: high priority, j: low priority}",
]
